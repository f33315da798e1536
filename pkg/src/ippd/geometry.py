"""Small polyline helpers shared by the generator, encoder, and metrics."""

from __future__ import annotations

import numpy as np


def polyline_length(points) -> float:
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def resample_polyline(points, spacing: float) -> np.ndarray:
    """Points every `spacing` meters of arc length, keeping both ends.

    The final point is always the original endpoint; when the total
    length is an exact multiple of spacing the last sample and the
    endpoint coincide and are not duplicated.
    """
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) == 0:
        raise ValueError("empty polyline")
    if len(pts) == 1:
        return pts.copy()
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total == 0.0:
        return pts[[0, -1]].copy()
    targets = np.arange(0.0, total, spacing)
    out = np.empty((len(targets) + 1, pts.shape[1]))
    for k, t in enumerate(targets):
        i = int(np.searchsorted(cum, t, side="right") - 1)
        i = min(i, len(seg) - 1)
        frac = (t - cum[i]) / seg[i] if seg[i] > 0 else 0.0
        out[k] = pts[i] + frac * (pts[i + 1] - pts[i])
    out[-1] = pts[-1]
    return out


def segment_headings(points) -> np.ndarray:
    """Heading of each point toward its successor; last repeats previous."""
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 2:
        return np.zeros(len(pts))
    d = np.diff(pts[:, :2], axis=0)
    h = np.arctan2(d[:, 1], d[:, 0])
    # zero-length steps inherit the previous heading
    for i in range(len(h)):
        if d[i, 0] == 0.0 and d[i, 1] == 0.0:
            h[i] = h[i - 1] if i > 0 else 0.0
    return np.concatenate([h, h[-1:]])
