"""Transformer discriminator scoring candidate paths against instructions.

Input sequence: [CLS] + instruction tokens + path keypoint features
(object-compass and pose vectors, interleaved by default). The [CLS]
output regresses a path-quality score; a masked-language-model head over
the instruction tokens regularizes training. Loss is the unit sum of the
score MSE and the MLM cross-entropy.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .checkpoint import load_checkpoint, save_checkpoint
from .encoding import (EMBED_DIM, L_POS, L_THETA, PathFeatures, PointSetEncoder,
                       PoseEncoder, collate_paths, make_embedding)
from .errors import ConfigError, DataError
from .metrics import D_TH, navigation_error, ndtw

D_MODEL = 120
N_LAYERS = 6
N_HEADS = 12
MAX_SEQ = 256
DROPOUT = 0.1
LAMBDA_MIX = 0.5
MASK_RATE = 0.15
MIN_TOKENS_FOR_MASK = 7

FUSION_MODES = ("interleave", "sum")


def target_score(candidate, gt_path, goal, lambda_mix=LAMBDA_MIX, d_th=D_TH):
    """Blend of path-shape fidelity and goal proximity, in [0, 1]."""
    fidelity = ndtw(candidate, gt_path, d_th)
    closeness = math.exp(-navigation_error(candidate, goal) / d_th)
    return lambda_mix * fidelity + (1.0 - lambda_mix) * closeness


class MultiHeadAttention(nn.Module):
    def __init__(self, d, n_heads, dropout=0.0):
        super().__init__()
        if d % n_heads:
            raise ConfigError(f"model width {d} not divisible by {n_heads} heads")
        self.n_heads = n_heads
        self.head_dim = d // n_heads
        self.qkv = nn.Linear(d, 3 * d)
        self.proj = nn.Linear(d, d)
        self.drop = nn.Dropout(dropout)

    def forward(self, x, key_valid):
        B, S, d = x.shape
        qkv = self.qkv(x).view(B, S, 3, self.n_heads, self.head_dim)
        q, k, v = qkv.unbind(dim=2)  # each (B, S, H, hd)
        q = q.transpose(1, 2)
        k = k.transpose(1, 2)
        v = v.transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)
        scores = scores.masked_fill(~key_valid[:, None, None, :], float("-inf"))
        attn = self.drop(torch.softmax(scores, dim=-1))
        out = (attn @ v).transpose(1, 2).reshape(B, S, d)
        return self.proj(out)


class TransformerLayer(nn.Module):
    """Post-LN: LayerNorm applied after each residual addition."""

    def __init__(self, d, n_heads, dropout=0.0):
        super().__init__()
        self.attn = MultiHeadAttention(d, n_heads, dropout)
        self.ln1 = nn.LayerNorm(d)
        self.ffn = nn.Sequential(
            nn.Linear(d, 4 * d), nn.ReLU(), nn.Dropout(dropout), nn.Linear(4 * d, d)
        )
        self.ln2 = nn.LayerNorm(d)
        self.drop = nn.Dropout(dropout)

    def forward(self, x, key_valid):
        x = self.ln1(x + self.drop(self.attn(x, key_valid)))
        x = self.ln2(x + self.drop(self.ffn(x)))
        return x


class PathDiscriminator(nn.Module):
    """Scores (instruction, candidate path) pairs.

    The 50-dim embedding table is shared between instruction tokens and
    compass category labels; ``cat_token`` maps category ids to rows.
    """

    def __init__(self, vocab_size, cat_token, d=D_MODEL, n_layers=N_LAYERS,
                 n_heads=N_HEADS, max_seq=MAX_SEQ, dropout=DROPOUT,
                 fusion="interleave", l_pos=L_POS, l_theta=L_THETA, seed=0):
        super().__init__()
        if fusion not in FUSION_MODES:
            raise ConfigError(f"unknown fusion mode {fusion!r}")
        self.d = d
        self.vocab_size = vocab_size
        self.max_seq = max_seq
        self.fusion = fusion
        torch.manual_seed(seed)
        self.embed = nn.Embedding(vocab_size, EMBED_DIM)
        with torch.no_grad():
            self.embed.weight.copy_(make_embedding(vocab_size, seed))
        self.register_buffer("cat_token", torch.as_tensor(cat_token, dtype=torch.long))
        self.fnn_lang = nn.Linear(EMBED_DIM, d)
        self.pointset = PointSetEncoder(d)
        self.pose_enc = PoseEncoder(d, l_pos, l_theta)
        self.cls_vec = nn.Parameter(torch.randn(d) * 0.02)
        self.mask_vec = nn.Parameter(torch.randn(d) * 0.02)
        self.pos_embed = nn.Embedding(max_seq, d)
        self.seg_embed = nn.Embedding(2, d)
        self.layers = nn.ModuleList(
            TransformerLayer(d, n_heads, dropout) for _ in range(n_layers)
        )
        self.score_head = nn.Linear(d, 1)
        self.mlm_head = nn.Linear(d, vocab_size)

    def path_tokens(self, batch):
        """Keypoint features -> path token sequence (B, S_path, d) + mask."""
        cats = self.cat_token[batch["compass_cats"]]
        emb = self.embed(cats).to(batch["compass_points"].dtype)
        feats = torch.cat([batch["compass_points"], emb], dim=-1)
        h = self.pointset(feats, batch["compass_mask"])  # (B, K, d)
        s = self.pose_enc(batch["pose_raw"])  # (B, K, d)
        kp_mask = batch["kp_mask"]
        if self.fusion == "sum":
            return h + s, kp_mask
        B, K, d = h.shape
        seq = torch.stack([h, s], dim=2).reshape(B, 2 * K, d)
        return seq, kp_mask.repeat_interleave(2, dim=1)

    def forward(self, batch):
        """Returns (scores (B,), mlm_logits (B, T, vocab))."""
        tokens = batch["tokens"]
        token_mask = batch["token_mask"]
        B, T = tokens.shape
        lang = self.fnn_lang(self.embed(tokens).to(self.fnn_lang.weight.dtype))
        mask_pos = batch.get("mask_positions")
        if mask_pos is not None and mask_pos.any():
            lang = torch.where(mask_pos.unsqueeze(-1),
                               self.mask_vec.to(lang.dtype).expand_as(lang), lang)
        path, path_mask = self.path_tokens(batch)
        cls = self.cls_vec.to(lang.dtype).expand(B, 1, -1)
        seq = torch.cat([cls, lang, path], dim=1)
        S = seq.shape[1]
        if S > self.max_seq:
            raise DataError(f"sequence length {S} exceeds limit {self.max_seq}")
        valid = torch.cat(
            [torch.ones((B, 1), dtype=torch.bool, device=seq.device),
             token_mask, path_mask], dim=1)
        pos = self.pos_embed(torch.arange(S, device=seq.device))
        seg = torch.cat([
            torch.zeros(1 + T, dtype=torch.long, device=seq.device),
            torch.ones(S - 1 - T, dtype=torch.long, device=seq.device)])
        x = seq + (pos + self.seg_embed(seg)).to(seq.dtype)
        for layer in self.layers:
            x = layer(x, valid)
        scores = self.score_head(x[:, 0]).squeeze(-1)
        mlm_logits = self.mlm_head(x[:, 1:1 + T])
        return scores, mlm_logits

    def config_tensors(self):
        return {
            "config/d": self.d,
            "config/n_layers": len(self.layers),
            "config/n_heads": self.layers[0].attn.n_heads,
            "config/vocab_size": self.vocab_size,
            "config/max_seq": self.max_seq,
            "config/fusion": FUSION_MODES.index(self.fusion),
            "config/l_pos": self.pose_enc.l_pos,
            "config/l_theta": self.pose_enc.l_theta,
            "config/n_categories": len(self.cat_token),
        }

    def save(self, path):
        tensors = dict(self.config_tensors())
        for name, t in self.state_dict().items():
            tensors[f"param/{name}"] = t.detach().cpu().numpy()
        save_checkpoint(path, tensors)

    @classmethod
    def load(cls, path):
        blob = load_checkpoint(path)
        try:
            # config entries round-trip as 1-element arrays
            cfg = {k.split("/", 1)[1]: np.asarray(blob[k]).reshape(-1)[0]
                   for k in blob if k.startswith("config/")}
            n_cats = int(cfg["n_categories"])
            model = cls(
                vocab_size=int(cfg["vocab_size"]),
                cat_token=np.zeros(n_cats, dtype=np.int64),
                d=int(cfg["d"]),
                n_layers=int(cfg["n_layers"]),
                n_heads=int(cfg["n_heads"]),
                max_seq=int(cfg["max_seq"]),
                fusion=FUSION_MODES[int(cfg["fusion"])],
                l_pos=int(cfg["l_pos"]),
                l_theta=int(cfg["l_theta"]),
            )
            state = {}
            for name, arr in blob.items():
                if not name.startswith("param/"):
                    continue
                key = name.split("/", 1)[1]
                ref = model.state_dict()[key]
                state[key] = torch.as_tensor(arr).to(ref.dtype).reshape(ref.shape)
        except KeyError as e:
            raise DataError(f"{path}: checkpoint missing entry {e}") from None
        model.load_state_dict(state)
        model.eval()
        return model


def build_model(vocab, categories, seed=0, **kwargs):
    """Model wired to a vocabulary and category table."""
    cat_token = vocab.encode(categories.labels)
    return PathDiscriminator(len(vocab), cat_token, seed=seed, **kwargs)


# -- training ---------------------------------------------------------------------


@dataclass
class TrainItem:
    tokens: np.ndarray  # (T,) vocab ids
    features: PathFeatures
    y: float


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 16
    lr: float = 1e-4
    weight_decay: float = 0.01
    mask_rate: float = MASK_RATE
    seed: int = 0
    log_path: str = ""
    num_threads: int = 0  # 0 keeps torch's default


def sample_mask_positions(length, rng, rate=MASK_RATE):
    """Token positions to mask; at least one when the text is long enough."""
    if length < MIN_TOKENS_FOR_MASK:
        return np.zeros(length, dtype=bool)
    mask = rng.random(length) < rate
    if not mask.any():
        mask[rng.integers(length)] = True
    return mask


def collate_items(items, pad_id, mask_positions=None, dtype=torch.float32):
    """Batch TrainItems into model input tensors (+ targets)."""
    B = len(items)
    T = max(len(it.tokens) for it in items)
    tokens = torch.full((B, T), pad_id, dtype=torch.long)
    token_mask = torch.zeros((B, T), dtype=torch.bool)
    mpos = torch.zeros((B, T), dtype=torch.bool)
    for b, it in enumerate(items):
        t = len(it.tokens)
        tokens[b, :t] = torch.as_tensor(it.tokens, dtype=torch.long)
        token_mask[b, :t] = True
        if mask_positions is not None:
            mpos[b, :t] = torch.as_tensor(mask_positions[b], dtype=torch.bool)
    batch = collate_paths([it.features for it in items], dtype=dtype)
    batch["tokens"] = tokens
    batch["token_mask"] = token_mask
    batch["mask_positions"] = mpos
    batch["y"] = torch.tensor([it.y for it in items], dtype=dtype)
    return batch


def compute_loss(model, batch):
    """(total, mse, mlm): unit-weight sum of score and language terms."""
    scores, mlm_logits = model(batch)
    mse = torch.mean((scores - batch["y"]) ** 2)
    mpos = batch["mask_positions"]
    if mpos.any():
        logits = mlm_logits[mpos]
        targets = batch["tokens"][mpos]
        mlm = nn.functional.cross_entropy(logits, targets)
    else:
        mlm = torch.zeros((), dtype=scores.dtype)
    return mse + mlm, mse, mlm


def train(model, items, config, pad_id=0):
    """Optimize in place; returns per-step history rows."""
    if not items:
        raise DataError("empty training set")
    if config.num_threads > 0:
        torch.set_num_threads(config.num_threads)
    torch.manual_seed(config.seed)
    opt = torch.optim.AdamW(model.parameters(), lr=config.lr,
                            weight_decay=config.weight_decay)
    model.train()
    history = []
    writer = None
    log_file = None
    if config.log_path:
        log_file = open(config.log_path, "w", newline="")
        writer = csv.writer(log_file)
        writer.writerow(["epoch", "step", "mse", "mlm", "total"])
    try:
        for epoch in range(config.epochs):
            rng = np.random.default_rng([config.seed, epoch, 0x7E41])
            order = rng.permutation(len(items))
            for step, lo in enumerate(range(0, len(items), config.batch_size)):
                chunk = [items[i] for i in order[lo:lo + config.batch_size]]
                masks = [sample_mask_positions(len(it.tokens), rng, config.mask_rate)
                         for it in chunk]
                batch = collate_items(chunk, pad_id, masks)
                total, mse, mlm = compute_loss(model, batch)
                if not torch.isfinite(total):
                    raise DataError(
                        f"non-finite loss at epoch {epoch} step {step}: "
                        f"mse={float(mse.detach())} mlm={float(mlm.detach())}")
                opt.zero_grad()
                total.backward()
                opt.step()
                row = (epoch, step, float(mse.detach()), float(mlm.detach()),
                       float(total.detach()))
                history.append(row)
                if writer:
                    writer.writerow([epoch, step, f"{row[2]:.6f}",
                                     f"{row[3]:.6f}", f"{row[4]:.6f}"])
    finally:
        if log_file:
            log_file.close()
    model.eval()
    return history


def rank(model, tokens, features_list, pad_id=0, batch_size=64):
    """(best index, scores) over candidate paths for one instruction.

    Ties go to the lower index.
    """
    if not features_list:
        raise DataError("rank() needs at least one candidate")
    model.eval()
    scores = []
    with torch.no_grad():
        for lo in range(0, len(features_list), batch_size):
            chunk = features_list[lo:lo + batch_size]
            items = [TrainItem(tokens=tokens, features=f, y=0.0) for f in chunk]
            batch = collate_items(items, pad_id)
            out, _ = model(batch)
            scores.extend(float(v) for v in out)
    best = int(np.argmax(scores))
    return best, scores
