"""Navigation evaluation metrics and report emission.

Conventions: paths are (k, 2) world-xy arrays, goals are xy (a trailing
z is ignored), the success radius is 3 m inclusive, and nDTW normalizes
by the ground-truth point count times the radius.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import DataError
from .geometry import polyline_length

D_TH = 3.0

METRIC_COLUMNS = ("TL", "NE", "nDTW", "OS", "SR", "SPL")


@njit(cache=True)
def _dtw_kernel(a, b):
    n = a.shape[0]
    m = b.shape[0]
    prev = np.full(m + 1, np.inf)
    cur = np.full(m + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur[0] = np.inf
        for j in range(1, m + 1):
            dx = a[i - 1, 0] - b[j - 1, 0]
            dy = a[i - 1, 1] - b[j - 1, 1]
            c = math.sqrt(dx * dx + dy * dy)
            best = prev[j]
            if prev[j - 1] < best:
                best = prev[j - 1]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = c + best
        prev, cur = cur, prev
    return prev[m]


def _as_xy(path):
    pts = np.asarray(path, dtype=np.float64)
    if pts.ndim != 2 or len(pts) == 0:
        raise DataError("path must be a non-empty (k, >=2) array")
    return np.ascontiguousarray(pts[:, :2])


def dtw(pred, gt) -> float:
    """Unit-step DTW with Euclidean point cost."""
    return float(_dtw_kernel(_as_xy(pred), _as_xy(gt)))


def ndtw(pred, gt, d_th: float = D_TH) -> float:
    """exp(-DTW / (|gt| * d_th)); |gt| is the ground-truth point count."""
    gt_xy = _as_xy(gt)
    return float(np.exp(-dtw(pred, gt_xy) / (len(gt_xy) * d_th)))


def navigation_error(pred, goal) -> float:
    pts = _as_xy(pred)
    g = np.asarray(goal, dtype=np.float64)[:2]
    return float(np.linalg.norm(pts[-1] - g))


def trajectory_length(pred) -> float:
    return polyline_length(_as_xy(pred))


def oracle_success(pred, goal, d_th: float = D_TH) -> int:
    pts = _as_xy(pred)
    g = np.asarray(goal, dtype=np.float64)[:2]
    dmin = float(np.linalg.norm(pts - g, axis=1).min())
    return 1 if dmin <= d_th else 0


def success(pred, goal, d_th: float = D_TH) -> int:
    return 1 if navigation_error(pred, goal) <= d_th else 0


def spl(sr: int, gt_len: float, pred_len: float) -> float:
    if sr == 0:
        return 0.0
    return float(sr * gt_len / max(gt_len, pred_len))


@dataclass
class EvalReport:
    """Per-episode metric rows plus arithmetic means."""

    split: str
    agent: str
    records: list = field(default_factory=list)

    def aggregate(self) -> dict:
        if not self.records:
            return {c: 0.0 for c in METRIC_COLUMNS}
        return {
            c: float(np.mean([r[c] for r in self.records])) for c in METRIC_COLUMNS
        }

    def to_json(self) -> str:
        payload = {
            "split": self.split,
            "agent": self.agent,
            "records": self.records,
            "aggregate": self.aggregate(),
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def write_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["episode_id"] + list(METRIC_COLUMNS) + ["fallback"])
            for r in self.records:
                writer.writerow(
                    [r["episode_id"]]
                    + [_fmt(r[c]) for c in METRIC_COLUMNS]
                    + [int(r.get("fallback", 0))]
                )
            agg = self.aggregate()
            writer.writerow(
                ["AGGREGATE"]
                + [_fmt(agg[c]) for c in METRIC_COLUMNS]
                + [sum(int(r.get("fallback", 0)) for r in self.records)]
            )

    @classmethod
    def read_json(cls, path) -> "EvalReport":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        return cls(
            split=payload["split"], agent=payload["agent"], records=payload["records"]
        )


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


def evaluate(episodes, predictions, split="", agent="", d_th: float = D_TH) -> EvalReport:
    """Score one prediction per episode.

    predictions maps episode id to (waypoints, fallback_flag); a missing
    id is an error.
    """
    report = EvalReport(split=split, agent=agent)
    for ep in episodes:
        if ep.id not in predictions:
            raise DataError(f"missing prediction for episode {ep.id}")
        pred, fallback = predictions[ep.id]
        gt = np.asarray(ep.gt_path, dtype=np.float64)
        sr = success(pred, ep.goal, d_th)
        report.records.append(
            {
                "episode_id": ep.id,
                "TL": trajectory_length(pred),
                "NE": navigation_error(pred, ep.goal),
                "nDTW": ndtw(pred, gt, d_th),
                "OS": oracle_success(pred, ep.goal, d_th),
                "SR": sr,
                "SPL": spl(sr, polyline_length(gt), trajectory_length(pred)),
                "fallback": int(fallback),
            }
        )
    return report
