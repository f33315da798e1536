"""End-to-end orchestration: data layout, dataset assembly, and agents.

A workspace directory holds maps, episode files per split, checkpoints,
logs, and reports. Three agents answer episodes: the trained
discriminator over instruction-constrained proposals ("ippd"), a uniform
pick over the same proposals ("proposal-only-uniform"), and an
instruction-blind random walk ("random-path").
"""

from __future__ import annotations

import os
import zlib

import numpy as np

from .discriminator import TrainItem, rank, target_score
from .encoding import (COMPASS_RADIUS_M, KEYPOINT_SPACING_M, MAX_KEYPOINTS,
                       PathFeatures, egocentric, normalize_pose)
from .envgen import load_episodes
from .errors import ConfigError, DataError, ProposalError
from .instruction_parser import LANDMARK, default_parser, tokenize
from .metrics import evaluate
from .proposer import (ClusterSet, ProposerLimits, SegmentCache, fallback_random,
                       propose, random_baseline)
from .semantic_map import load_map

AGENT_IPPD = "ippd"
AGENT_PROPOSAL = "proposal-only-uniform"
AGENT_RANDOM = "random-path"
AGENTS = (AGENT_IPPD, AGENT_PROPOSAL, AGENT_RANDOM)

SPLITS = ("train", "eval_seen", "eval_unseen")


def _sub_seed(episode_id, tag):
    return [zlib.crc32(episode_id.encode()), tag]


class Workspace:
    """Data-root layout plus per-map caches (map, navgrid, clusters)."""

    def __init__(self, root):
        self.root = root
        self._maps = {}
        self._grids = {}
        self._clusters = {}
        self._caches = {}

    def path(self, *parts):
        return os.path.join(self.root, *parts)

    @property
    def maps_dir(self):
        return self.path("maps")

    def map_path(self, map_id):
        return self.path("maps", f"{map_id}.map")

    def episodes_path(self, split):
        return self.path("episodes", f"{split}.jsonl")

    def checkpoint_path(self):
        return self.path("checkpoints", "discriminator.ckpt")

    def train_log_path(self):
        return self.path("logs", "train_log.csv")

    def report_path(self, split, agent, ext):
        return self.path("reports", f"{split}_{agent}.{ext}")

    def ensure_dirs(self):
        for sub in ("maps", "episodes", "checkpoints", "logs", "reports", "renders"):
            os.makedirs(self.path(sub), exist_ok=True)

    def map_ids(self):
        if not os.path.isdir(self.maps_dir):
            return []
        return sorted(f[:-4] for f in os.listdir(self.maps_dir) if f.endswith(".map"))

    def load_map(self, map_id):
        if map_id not in self._maps:
            path = self.map_path(map_id)
            if not os.path.exists(path):
                raise DataError(f"missing map file {path}")
            self._maps[map_id] = load_map(path, map_id=map_id)
        return self._maps[map_id]

    def grid(self, map_id):
        if map_id not in self._grids:
            self._grids[map_id] = self.load_map(map_id).project_navgrid()
        return self._grids[map_id]

    def clusters(self, map_id, limits):
        key = (map_id, limits.eps, limits.min_pts)
        if key not in self._clusters:
            self._clusters[key] = ClusterSet.build(
                self.load_map(map_id), eps=limits.eps, min_pts=limits.min_pts)
        return self._clusters[key]

    def segment_cache(self, map_id):
        if map_id not in self._caches:
            self._caches[map_id] = SegmentCache(self.grid(map_id))
        return self._caches[map_id]

    def episodes(self, split):
        path = self.episodes_path(split)
        if not os.path.exists(path):
            raise DataError(f"missing episode file {path}")
        return load_episodes(path)


class FeatureExtractor:
    """Path -> PathFeatures on one map, with a keypoint-level compass cache.

    Candidates within an episode share long prefixes, so radius queries
    at repeated keypoints are memoized by rounded position.
    """

    def __init__(self, vmap, spacing=KEYPOINT_SPACING_M, radius=COMPASS_RADIUS_M,
                 max_keypoints=MAX_KEYPOINTS):
        self.vmap = vmap
        self.spacing = spacing
        self.radius = radius
        self.max_keypoints = max_keypoints
        self.bounds = vmap.bounds()
        self._compass = {}

    def _query(self, x, y):
        key = (round(x, 6), round(y, 6))
        hit = self._compass.get(key)
        if hit is None:
            found = self.vmap.radius_query((x, y, 0.0), self.radius)
            if found:
                pts = np.array([h.centroid for h in found])
                cats = np.array([h.category_id for h in found], dtype=np.int64)
            else:
                pts = np.zeros((0, 3))
                cats = np.zeros(0, dtype=np.int64)
            hit = (pts, cats)
            self._compass[key] = hit
        return hit

    def __call__(self, waypoints, start_theta=None):
        from .encoding import discretize

        kp, headings = discretize(waypoints, self.spacing, self.max_keypoints)
        if start_theta is not None:
            headings = headings.copy()
            headings[0] = start_theta
        pose_raw = np.empty((len(kp), 4))
        points, cats = [], []
        for i in range(len(kp)):
            x, y, theta = float(kp[i, 0]), float(kp[i, 1]), float(headings[i])
            pose_raw[i] = normalize_pose((x, y, 0.0), theta, self.bounds)
            raw_pts, raw_cats = self._query(x, y)
            if len(raw_pts):
                points.append(egocentric(raw_pts, (x, y, 0.0, theta)))
            else:
                points.append(raw_pts)
            cats.append(raw_cats)
        return PathFeatures(pose_raw=pose_raw, compass_points=points, compass_cats=cats)


def propose_for_episode(vmap, grid, clusters, parser, limits, ep, cache=None):
    """(candidates, fallback flag) for one episode.

    Falls back to random endpoint sampling when the instruction yields no
    landmarks or every constrained branch prunes away.
    """
    components = parser.extract_key_components(ep.instruction)
    start = (ep.start_pose[0], ep.start_pose[1], ep.start_pose[3])
    candidates = []
    if any(c.kind == LANDMARK for c in components):
        candidates = propose(vmap, grid, components, start,
                             seed=ep.proposal_seed(), limits=limits,
                             clusters=clusters, cache=cache)
    if candidates:
        return candidates, False
    fallback = fallback_random(grid, start, seed=_sub_seed(ep.id, 0xFA11),
                               limits=limits)
    if not fallback:
        raise ProposalError(f"episode {ep.id}: no fallback paths")
    return fallback, True


def candidate_targets(candidates, ep, lambda_mix):
    gt = np.asarray(ep.gt_path)[:, :2]
    goal = np.array(ep.goal[:2])
    return np.array([
        target_score(c.waypoints, gt, goal, lambda_mix) for c in candidates
    ])


def build_training_items(ws, vocab, split="train", parser=None, limits=None,
                         n_per_episode=16, lambda_mix=0.5, spacing=KEYPOINT_SPACING_M,
                         radius=COMPASS_RADIUS_M, max_keypoints=MAX_KEYPOINTS):
    """TrainItems across a split: per episode, the best-target candidate
    plus a seeded sample of the rest."""
    parser = parser or default_parser()
    limits = limits or ProposerLimits()
    items = []
    extractors = {}
    for ep in ws.episodes(split):
        vmap = ws.load_map(ep.map_id)
        if ep.map_id not in extractors:
            extractors[ep.map_id] = FeatureExtractor(vmap, spacing, radius,
                                                     max_keypoints)
        extractor = extractors[ep.map_id]
        candidates, _ = propose_for_episode(
            vmap, ws.grid(ep.map_id), ws.clusters(ep.map_id, limits),
            parser, limits, ep, cache=ws.segment_cache(ep.map_id))
        y = candidate_targets(candidates, ep, lambda_mix)
        keep = np.arange(len(candidates))
        if len(candidates) > n_per_episode:
            rng = np.random.default_rng(_sub_seed(ep.id, 0x7A41))
            best = int(np.argmax(y))
            rest = np.delete(keep, best)
            picked = rng.choice(rest, size=n_per_episode - 1, replace=False)
            keep = np.concatenate([[best], picked])
        tokens = vocab.encode(tokenize(ep.instruction, keep_punct=False))
        theta = ep.start_pose[3]
        for i in keep:
            feats = extractor(candidates[i].waypoints, start_theta=theta)
            items.append(TrainItem(tokens=tokens, features=feats, y=float(y[i])))
    if not items:
        raise DataError(f"no training items assembled from split {split!r}")
    return items


def answer_episode(ws, ep, agent, model=None, vocab=None, parser=None,
                   limits=None, extractor=None):
    """(waypoints, fallback flag) for one episode under one agent."""
    parser = parser or default_parser()
    limits = limits or ProposerLimits()
    grid = ws.grid(ep.map_id)
    start = (ep.start_pose[0], ep.start_pose[1], ep.start_pose[3])
    if agent == AGENT_RANDOM:
        cand = random_baseline(grid, start, seed=_sub_seed(ep.id, 0xBA5E))
        return cand.waypoints, False
    vmap = ws.load_map(ep.map_id)
    candidates, fallback = propose_for_episode(
        vmap, grid, ws.clusters(ep.map_id, limits), parser, limits, ep,
        cache=ws.segment_cache(ep.map_id))
    if agent == AGENT_PROPOSAL:
        rng = np.random.default_rng(_sub_seed(ep.id, 0x91CC))
        return candidates[int(rng.integers(len(candidates)))].waypoints, fallback
    if agent != AGENT_IPPD:
        raise ConfigError(f"unknown agent {agent!r}")
    if model is None or vocab is None:
        raise ConfigError("the ippd agent needs a model and vocabulary")
    if extractor is None:
        extractor = FeatureExtractor(vmap)
    tokens = vocab.encode(tokenize(ep.instruction, keep_punct=False))
    feats = [extractor(c.waypoints, start_theta=ep.start_pose[3])
             for c in candidates]
    best, _ = rank(model, tokens, feats, pad_id=vocab.pad_id())
    return candidates[best].waypoints, fallback


def run_split(ws, split, agent, model=None, vocab=None, parser=None,
              limits=None, d_th=3.0):
    """Evaluate one agent over one split; returns the report."""
    parser = parser or default_parser()
    limits = limits or ProposerLimits()
    episodes = ws.episodes(split)
    extractors = {}
    predictions = {}
    for ep in episodes:
        if agent == AGENT_IPPD and ep.map_id not in extractors:
            extractors[ep.map_id] = FeatureExtractor(ws.load_map(ep.map_id))
        waypoints, fallback = answer_episode(
            ws, ep, agent, model=model, vocab=vocab, parser=parser,
            limits=limits, extractor=extractors.get(ep.map_id))
        predictions[ep.id] = (waypoints, fallback)
    return evaluate(episodes, predictions, split=split, agent=agent, d_th=d_th)
