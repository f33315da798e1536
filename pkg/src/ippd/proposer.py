"""Instruction-constrained candidate path proposal.

Landmark mentions branch over DBSCAN cluster cores of the mentioned
category within a geodesic bound; turn mentions constrain the direction
of the next landmark relative to the agent's heading. Full assignments
become paths by stitching per-segment A* plans and sampling endpoints
near the final core.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clustering import dbscan
from .errors import ProposalError
from .instruction_parser import LANDMARK, TURN_LEFT, TURN_RIGHT
from .pathfinding import astar, distance_field
from .semantic_map import NavGrid, SemanticVoxelMap

TURN_MIN_DEG = 15.0
TURN_MAX_DEG = 165.0
SQRT2_STEP = math.sqrt(2.0)
CORE_SNAP_RADIUS_M = 0.75

RANDOM_LENGTH_MEAN = 8.89
RANDOM_LENGTH_STD = 2.67
RANDOM_LENGTH_RANGE = (1.0, 20.0)


@dataclass
class ProposerLimits:
    """Search bounds; defaults follow the pipeline constants."""

    max_segment_m: float = 5.0
    endpoint_radius_m: float = 2.0
    n_end: int = 3
    max_candidates: int = 2000
    n_fallback: int = 100
    fallback_radius_m: float = 20.0
    eps: float = 0.5
    min_pts: int = 1


@dataclass(frozen=True)
class Cluster:
    category_id: int
    cluster_index: int
    member_ids: tuple  # instance ids
    core_positions: tuple  # ((x, y), ...) of core samples
    core: tuple  # seed core sample (x, y)


@dataclass
class ClusterSet:
    """Per-category DBSCAN clusters of instance centroids (xy)."""

    by_category: dict

    @classmethod
    def build(cls, vmap: SemanticVoxelMap, eps=0.5, min_pts=1):
        by_category = {}
        per_cat = {}
        for obj in vmap.instances():
            per_cat.setdefault(obj.category_id, []).append(obj)
        for cat, objs in sorted(per_cat.items()):
            pts = np.array([o.centroid[:2] for o in objs])
            labels, core_mask = dbscan(pts, eps=eps, min_pts=min_pts)
            clusters = []
            for cid in range(labels.max() + 1):
                members = np.nonzero(labels == cid)[0]
                cores = [i for i in members if core_mask[i]]
                seed = cores[0] if cores else members[0]
                clusters.append(
                    Cluster(
                        category_id=cat,
                        cluster_index=cid,
                        member_ids=tuple(objs[i].instance_id for i in members),
                        core_positions=tuple(
                            (float(pts[i, 0]), float(pts[i, 1])) for i in cores
                        ),
                        core=(float(pts[seed, 0]), float(pts[seed, 1])),
                    )
                )
            by_category[cat] = clusters
        return cls(by_category)

    def clusters_of(self, category_id):
        return self.by_category.get(category_id, [])


@dataclass(frozen=True)
class LandmarkVisit:
    component_index: int
    category_id: int
    cluster_index: int
    core: tuple  # (x, y)


@dataclass
class CandidatePath:
    waypoints: np.ndarray  # (k, 2) world xy, grid-cell centers
    visited_landmarks: list
    endpoint: tuple
    geodesic_length: float

    def waypoint_key(self):
        return self.waypoints.tobytes()


def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


def _turn_ok(pose, point, direction):
    x, y, theta = pose
    alpha = wrap_angle(math.atan2(point[1] - y, point[0] - x) - theta)
    lo = math.radians(TURN_MIN_DEG)
    hi = math.radians(TURN_MAX_DEG)
    if direction == TURN_LEFT:
        return lo < alpha < hi
    if direction == TURN_RIGHT:
        return -hi < alpha < -lo
    raise ValueError(f"bad turn direction {direction!r}")


def turn_filter(pose, candidates, direction):
    """Keep points lying to the requested side of the heading.

    pose is (x, y, theta); the signed bearing of a kept point falls in
    the open interval (15, 165) degrees for left (mirrored for right).
    """
    return [p for p in candidates if _turn_ok(pose, p, direction)]


def _heading_after(path, fallback_theta):
    if len(path) < 2:
        return fallback_theta
    dx = float(path[-1][0] - path[-2][0])
    dy = float(path[-1][1] - path[-2][1])
    return math.atan2(dy, dx)


@dataclass
class _State:
    cell: tuple
    theta: float
    cells: list  # full cell path so far (list of (ix, iy))
    length: float
    visits: list  # LandmarkVisit list
    pending: list  # pending turn kinds


class SegmentCache:
    """Memoizes A* segments and bounded distance fields per grid.

    Reusable across propose() calls on the same map; results do not
    depend on the episode, only on the grid.
    """

    def __init__(self, grid: NavGrid):
        self.grid = grid
        self.segments = {}
        self.fields = {}

    def field(self, cell, limit_m):
        key = (cell, limit_m)
        if key not in self.fields:
            self.fields[key] = distance_field(self.grid, cell, limit_m)
        return self.fields[key]

    def segment(self, a, b):
        key = (a, b)
        if key not in self.segments:
            self.segments[key] = astar(self.grid, a, b)
        return self.segments[key]


def propose(vmap, grid, components, start_pose, seed=0, limits=None, clusters=None,
            cache=None):
    """Candidate paths satisfying the key components in order.

    start_pose is (x, y, theta) in world coordinates. Returns a list of
    CandidatePath in a deterministic order; empty when no landmark
    component survives (the caller is expected to fall back).
    """
    limits = limits or ProposerLimits()
    if clusters is None:
        clusters = ClusterSet.build(vmap, eps=limits.eps, min_pts=limits.min_pts)
    if cache is None or cache.grid is not grid:
        cache = SegmentCache(grid)
    rng = np.random.default_rng(seed)

    landmarks = [c for c in components if c.kind == LANDMARK]
    if not landmarks:
        return []

    start_cell = grid.world_to_cell(start_pose[0], start_pose[1])
    if not grid.is_navigable(*start_cell):
        raise ProposalError(f"start cell {start_cell} is not navigable")

    states = [
        _State(
            cell=start_cell,
            theta=float(start_pose[2]),
            cells=[start_cell],
            length=0.0,
            visits=[],
            pending=[],
        )
    ]
    for comp_idx, comp in enumerate(components):
        if comp.kind in (TURN_LEFT, TURN_RIGHT):
            for st in states:
                st.pending.append(comp.kind)
            continue
        next_states = []
        for st in states:
            pos = grid.cell_to_world(*st.cell)
            pose = (pos[0], pos[1], st.theta)
            dist = cache.field(st.cell, limits.max_segment_m)
            for cl in clusters.clusters_of(comp.category_id):
                core_cell = _nearest_cell(grid, cl.core)
                if core_cell is None:
                    continue
                if dist[core_cell] > limits.max_segment_m:
                    continue
                if any(not _turn_ok(pose, cl.core, t) for t in st.pending):
                    continue
                seg = cache.segment(st.cell, core_cell)
                if seg is None:
                    continue
                seg_path, seg_cost = seg
                cells = st.cells + [tuple(c) for c in seg_path[1:]]
                next_states.append(
                    _State(
                        cell=core_cell,
                        theta=_heading_after(seg_path, st.theta),
                        cells=cells,
                        length=st.length + seg_cost,
                        visits=st.visits
                        + [
                            LandmarkVisit(
                                comp_idx, cl.category_id, cl.cluster_index, cl.core
                            )
                        ],
                        pending=[],
                    )
                )
        # breadth-first truncation keeps the tree bounded
        states = next_states[: limits.max_candidates]
        if not states:
            return []

    candidates = []
    seen = set()
    for st in states:
        if len(candidates) >= limits.max_candidates:
            break
        end_field = cache.field(st.cell, limits.endpoint_radius_m)
        reachable = np.argwhere(np.isfinite(end_field))
        if len(reachable) == 0:
            continue
        n_pick = min(limits.n_end, len(reachable))
        picks = rng.choice(len(reachable), size=n_pick, replace=False)
        for pick in picks:
            if len(candidates) >= limits.max_candidates:
                break
            end_cell = (int(reachable[pick][0]), int(reachable[pick][1]))
            seg = cache.segment(st.cell, end_cell)
            if seg is None:
                continue
            seg_path, seg_cost = seg
            cells = st.cells + [tuple(c) for c in seg_path[1:]]
            key = tuple(cells)
            if key in seen:
                continue
            seen.add(key)
            candidates.append(
                _make_candidate(grid, cells, st.visits, st.length + seg_cost)
            )

    candidates.sort(
        key=lambda c: (
            tuple((v.component_index, v.category_id, v.cluster_index) for v in c.visited_landmarks),
            c.endpoint,
        )
    )
    return candidates


def _nearest_cell(grid, point):
    """Cell of the point, or the nearest navigable cell within 0.5 m."""
    try:
        cell = grid.world_to_cell(point[0], point[1])
    except Exception:
        return None
    if grid.is_navigable(*cell):
        return cell
    # object centroids sit on occupied voxels; snap to free space nearby
    best = None
    radius = int(round(CORE_SNAP_RADIUS_M / grid.resolution))
    for dx in range(-radius, radius + 1):
        for dy in range(-radius, radius + 1):
            x, y = cell[0] + dx, cell[1] + dy
            if 0 <= x < grid.dims[0] and 0 <= y < grid.dims[1] and grid.cells[x, y]:
                d = dx * dx + dy * dy
                if best is None or (d, x, y) < best:
                    best = (d, x, y)
    if best is None:
        return None
    return (best[1], best[2])


def _make_candidate(grid, cells, visits, length):
    pts = np.array([grid.cell_to_world(x, y) for x, y in cells], dtype=np.float64)
    return CandidatePath(
        waypoints=pts,
        visited_landmarks=list(visits),
        endpoint=(float(pts[-1, 0]), float(pts[-1, 1])),
        geodesic_length=float(length),
    )


def fallback_random(grid, start_pose, seed=0, limits=None):
    """Random A* paths from the start, endpoints within the fallback radius."""
    limits = limits or ProposerLimits()
    start_cell = grid.world_to_cell(start_pose[0], start_pose[1])
    if not grid.is_navigable(*start_cell):
        raise ProposalError(f"start cell {start_cell} is not navigable")
    rng = np.random.default_rng(seed)
    dist = distance_field(grid, start_cell, limits.fallback_radius_m)
    reachable = np.argwhere(np.isfinite(dist) & (dist > 0))
    if len(reachable) == 0:
        raise ProposalError("no reachable fallback endpoints")
    n_pick = min(limits.n_fallback, len(reachable))
    picks = rng.choice(len(reachable), size=n_pick, replace=False)
    out = []
    seen = set()
    for pick in picks:
        end_cell = (int(reachable[pick][0]), int(reachable[pick][1]))
        seg = astar(grid, start_cell, end_cell)
        if seg is None:
            continue
        seg_path, seg_cost = seg
        cells = [tuple(c) for c in seg_path]
        key = tuple(cells)
        if key in seen:
            continue
        seen.add(key)
        out.append(_make_candidate(grid, cells, [], seg_cost))
    return out


def random_baseline(grid, start_pose, seed=0, max_hops=64, hop_radius_m=1.0):
    """One instruction-blind path whose length targets N(8.89, 2.67) meters.

    A random walk of A* hops: each hop goes to a waypoint sampled
    uniformly from the cells within hop_radius_m geodesic of the current
    cell, until the cumulative length reaches the target (clamped to
    [1, 20] m).
    """
    start_cell = grid.world_to_cell(start_pose[0], start_pose[1])
    if not grid.is_navigable(*start_cell):
        raise ProposalError(f"start cell {start_cell} is not navigable")
    rng = np.random.default_rng(seed)
    lo, hi = RANDOM_LENGTH_RANGE
    target = float(np.clip(rng.normal(RANDOM_LENGTH_MEAN, RANDOM_LENGTH_STD), lo, hi))

    cells = [start_cell]
    total = 0.0
    for _ in range(max_hops):
        if total >= target:
            break
        field = distance_field(grid, cells[-1], hop_radius_m)
        near = np.argwhere(np.isfinite(field) & (field > 0))
        if len(near) == 0:
            break
        goal = near[rng.integers(len(near))]
        seg = astar(grid, cells[-1], (int(goal[0]), int(goal[1])))
        if seg is None or len(seg[0]) < 2:
            continue
        seg_path, _ = seg
        for a, b in zip(seg_path[:-1], seg_path[1:]):
            step = SQRT2_STEP if abs(b[0] - a[0]) + abs(b[1] - a[1]) == 2 else 1.0
            cells.append((int(b[0]), int(b[1])))
            total += step * grid.resolution
            if total >= target:
                break
    return _make_candidate(grid, cells, [], total)
