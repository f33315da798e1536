"""Path feature extraction and encoders.

A candidate path becomes a sequence of keypoints (1 m spacing, capped at
64). Each keypoint gets an object compass — instances within 3 m in the
agent's egocentric frame plus their 50-dim category embeddings — encoded
by a permutation-invariant point-set network, and a pose feature from
sin/cos positional encodings of the normalized pose.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .errors import DataError, MapBoundsError
from .geometry import resample_polyline, segment_headings

EMBED_DIM = 50
COMPASS_RADIUS_M = 3.0
KEYPOINT_SPACING_M = 1.0
MAX_KEYPOINTS = 64
L_POS = 6
L_THETA = 4

PAD, UNK = "<pad>", "<unk>"


class Vocab:
    """Token vocabulary: specials first, then sorted lexicon words."""

    def __init__(self, words):
        self.words = [PAD, UNK] + sorted(set(words))
        self.index = {w: i for i, w in enumerate(self.words)}

    def __len__(self):
        return len(self.words)

    @classmethod
    def from_lexicon(cls, lexicon):
        return cls(lexicon.entries.keys())

    def encode(self, tokens):
        unk = self.index[UNK]
        return np.array([self.index.get(t, unk) for t in tokens], dtype=np.int64)

    def pad_id(self):
        return self.index[PAD]


def make_embedding(vocab_size, seed=0, dim=EMBED_DIM):
    """Deterministic unit-norm rows; row 0 (pad) is zero."""
    rng = np.random.default_rng([seed, 0x50D])
    table = rng.standard_normal((vocab_size, dim))
    table /= np.linalg.norm(table, axis=1, keepdims=True)
    table[0] = 0.0
    return torch.tensor(table, dtype=torch.float32)


# -- raw feature extraction (numpy side) ------------------------------------------


def discretize(waypoints, spacing=KEYPOINT_SPACING_M, max_keypoints=MAX_KEYPOINTS):
    """Keypoint positions and headings along a path.

    Resamples at the given arc-length spacing keeping both endpoints,
    then uniformly subsamples down to the cap if needed.
    """
    pts = np.asarray(waypoints, dtype=np.float64)
    if len(pts) == 0:
        raise DataError("cannot discretize an empty path")
    if len(pts) == 1:
        pts = np.vstack([pts, pts])
    kp = resample_polyline(pts, spacing)
    if len(kp) < 2:
        kp = np.vstack([kp[0], pts[-1]])
    if len(kp) > max_keypoints:
        idx = np.unique(np.round(np.linspace(0, len(kp) - 1, max_keypoints)).astype(int))
        kp = kp[idx]
    return kp, segment_headings(kp)


def egocentric(points, pose):
    """World points (n, 3) into the agent frame (translate, rotate by -theta)."""
    x, y, z, theta = pose
    t = np.asarray(points, dtype=np.float64) - np.array([x, y, z])
    c, s = np.cos(theta), np.sin(theta)
    ego = np.empty_like(t)
    ego[:, 0] = c * t[:, 0] + s * t[:, 1]
    ego[:, 1] = -s * t[:, 0] + c * t[:, 1]
    ego[:, 2] = t[:, 2]
    return ego


def object_compass(vmap, pose, radius=COMPASS_RADIUS_M):
    """(points (n,3) egocentric, category ids (n,)) for instances within radius."""
    x, y, z, theta = pose
    hits = vmap.radius_query((x, y, z), radius)
    if not hits:
        return np.zeros((0, 3)), np.zeros(0, dtype=np.int64)
    centroids = np.array([h.centroid for h in hits])
    cats = np.array([h.category_id for h in hits], dtype=np.int64)
    return egocentric(centroids, pose), cats


@dataclass
class PathFeatures:
    """Raw per-keypoint inputs for the encoders (model-independent)."""

    pose_raw: np.ndarray  # (K, 4) normalized x, y, z, theta/pi
    compass_points: list  # K arrays (P_i, 3)
    compass_cats: list  # K arrays (P_i,)

    def __len__(self):
        return len(self.pose_raw)


def normalize_pose(position, theta, bounds):
    (x0, y0, z0), (x1, y1, z1) = bounds
    x, y, z = position
    if not (x0 <= x <= x1 and y0 <= y <= y1 and z0 <= z <= z1):
        raise MapBoundsError(f"pose position {position} outside map bounds")
    nx = 2.0 * (x - x0) / (x1 - x0) - 1.0
    ny = 2.0 * (y - y0) / (y1 - y0) - 1.0
    nz = 2.0 * (z - z0) / (z1 - z0) - 1.0 if z1 > z0 else 0.0
    from .proposer import wrap_angle

    return np.array([nx, ny, nz, wrap_angle(theta) / np.pi])


def extract_path_features(vmap, waypoints, agent_z=0.0, spacing=KEYPOINT_SPACING_M,
                          radius=COMPASS_RADIUS_M, max_keypoints=MAX_KEYPOINTS,
                          start_theta=None):
    """PathFeatures for one candidate path on one map."""
    kp, headings = discretize(waypoints, spacing, max_keypoints)
    if start_theta is not None:
        headings = headings.copy()
        headings[0] = start_theta
    bounds = vmap.bounds()
    pose_raw = np.empty((len(kp), 4))
    points, cats = [], []
    for i in range(len(kp)):
        pose = (float(kp[i, 0]), float(kp[i, 1]), agent_z, float(headings[i]))
        pose_raw[i] = normalize_pose(pose[:3], pose[3], bounds)
        p, c = object_compass(vmap, pose, radius)
        points.append(p)
        cats.append(c)
    return PathFeatures(pose_raw=pose_raw, compass_points=points, compass_cats=cats)


# -- torch encoders ------------------------------------------------------------


class PointSetEncoder(nn.Module):
    """Permutation-invariant encoder: per-point MLP, masked max, affine."""

    def __init__(self, d, in_dim=3 + EMBED_DIM, hidden=64):
        super().__init__()
        self.lin1 = nn.Linear(in_dim, hidden)
        self.lin2 = nn.Linear(hidden, d)
        self.out = nn.Linear(d, d)
        self.empty_default = nn.Parameter(torch.zeros(d))

    def forward(self, feats, mask):
        """feats (..., P, in_dim), mask (..., P) -> (..., d)."""
        h = torch.relu(self.lin2(torch.relu(self.lin1(feats))))
        h = h.masked_fill(~mask.unsqueeze(-1), float("-inf"))
        pooled = h.max(dim=-2).values
        empty = ~mask.any(dim=-1, keepdim=True)
        default = self.empty_default.to(pooled.dtype)
        pooled = torch.where(empty, default.expand_as(pooled), pooled)
        return self.out(pooled)


def positional_encoding(v, n_freq):
    """(..., c) -> (..., c * 2 * n_freq): sin/cos at frequencies 2^l * pi."""
    parts = []
    for l in range(n_freq):
        arg = (2.0 ** l) * torch.pi * v
        parts.append(torch.sin(arg))
        parts.append(torch.cos(arg))
    return torch.cat(parts, dim=-1)


class PoseEncoder(nn.Module):
    """FFN over sin/cos encodings of (x, y, z) and heading."""

    def __init__(self, d, l_pos=L_POS, l_theta=L_THETA):
        super().__init__()
        self.l_pos = l_pos
        self.l_theta = l_theta
        in_dim = 3 * 2 * l_pos + 2 * l_theta
        self.ffn = nn.Linear(in_dim, d)

    def forward(self, pose_raw):
        """pose_raw (..., 4) normalized -> (..., d)."""
        pe_pos = positional_encoding(pose_raw[..., :3], self.l_pos)
        pe_theta = positional_encoding(pose_raw[..., 3:4], self.l_theta)
        return self.ffn(torch.cat([pe_pos, pe_theta], dim=-1))


def collate_paths(features_list, pad_cat=0, dtype=torch.float32):
    """Pad a list of PathFeatures into batch tensors.

    Returns dict with compass_points (B,K,P,3), compass_cats (B,K,P),
    compass_mask (B,K,P), pose_raw (B,K,4), kp_mask (B,K).
    """
    B = len(features_list)
    K = max(len(f) for f in features_list)
    P = max((len(p) for f in features_list for p in f.compass_points), default=1)
    P = max(P, 1)
    points = torch.zeros((B, K, P, 3), dtype=dtype)
    cats = torch.full((B, K, P), pad_cat, dtype=torch.long)
    cmask = torch.zeros((B, K, P), dtype=torch.bool)
    pose = torch.zeros((B, K, 4), dtype=dtype)
    kp_mask = torch.zeros((B, K), dtype=torch.bool)
    for b, f in enumerate(features_list):
        k = len(f)
        kp_mask[b, :k] = True
        pose[b, :k] = torch.as_tensor(f.pose_raw, dtype=dtype)
        for i in range(k):
            n = len(f.compass_points[i])
            if n:
                points[b, i, :n] = torch.as_tensor(f.compass_points[i], dtype=dtype)
                cats[b, i, :n] = torch.as_tensor(f.compass_cats[i], dtype=torch.long)
                cmask[b, i, :n] = True
    return {
        "compass_points": points,
        "compass_cats": cats,
        "compass_mask": cmask,
        "pose_raw": pose,
        "kp_mask": kp_mask,
    }
