"""Synthetic single-floor environments, episodes, and instructions.

Maps are room grids connected by door gaps; objects are solid voxel
blocks with fresh instance ids. Episodes pair an A*-optimal ground-truth
path with a templated instruction whose landmarks and turns the parser
recovers exactly. Everything is a pure function of its seed.
"""

from __future__ import annotations

import colorsys
import json
import zlib
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import DataError
from .geometry import resample_polyline, segment_headings
from .instruction_parser import LANDMARK, default_parser
from .pathfinding import astar, distance_field
from .proposer import ProposerLimits, ClusterSet, SegmentCache, propose, wrap_angle
from .semantic_map import CategoryTable, SemanticVoxelMap, _VOXEL_DTYPE

WALL_T = 2  # wall thickness in cells
DOOR_W = 18  # door gap width in cells (0.9 m)
DOOR_CLEAR = 10  # object keep-out around doors in cells
ROOM_MARGIN = 4  # object margin from room walls in cells

TURN_CLAUSE_DEG = 45.0
LANDMARK_RADIUS_M = 3.0
MENTION_STRIDE_M = 3.0

DEFAULT_POOL = (
    "sofa", "chair", "table", "bed", "lamp", "television",
    "refrigerator", "oven", "sink", "plant", "piano", "bookcase",
)

# nominal (width, depth, height) meters per category; fallback for the rest
OBJECT_SIZES = {
    "sofa": (1.6, 0.8, 0.8),
    "chair": (0.5, 0.5, 0.9),
    "table": (1.2, 0.8, 0.75),
    "bed": (1.8, 1.4, 0.6),
    "lamp": (0.3, 0.3, 1.4),
    "television": (0.9, 0.25, 0.6),
    "refrigerator": (0.7, 0.7, 1.7),
    "oven": (0.6, 0.6, 0.9),
    "sink": (0.6, 0.5, 0.85),
    "plant": (0.4, 0.4, 1.0),
    "piano": (1.4, 0.6, 1.1),
    "bookcase": (0.9, 0.3, 1.8),
}
DEFAULT_SIZE = (0.5, 0.5, 0.8)

# paraphrases the parser resolves back to the original category
PARAPHRASES = {
    "sofa": ("couch",),
    "refrigerator": ("fridge",),
    "television": ("tv",),
    "rug": ("carpet",),
    "cabinet": ("cupboard",),
    "bathtub": ("tub",),
    "sink": ("basin",),
    "bookcase": ("bookshelf",),
    "door": ("doorway",),
    "picture": ("photo",),
    "oven": ("stove",),
    "chair": ("armchair",),
    "lamp": ("chandelier",),
    "bed": ("crib",),
    "plant": ("flower",),
}

TURN_TEMPLATES = {
    "left": ("turn left", "take a left turn", "head to the left"),
    "right": ("turn right", "take a right turn", "head to the right"),
}


@dataclass
class EnvSpec:
    seed: int
    grid_rooms: tuple = (3, 3)
    room_size_range: tuple = (3.8, 5.0)
    objects_per_room_range: tuple = (3, 5)
    category_pool: tuple = DEFAULT_POOL
    resolution: float = 0.05
    map_id: str = ""

    def __post_init__(self):
        if self.grid_rooms[0] * self.grid_rooms[1] < 2:
            raise DataError("need at least 2 rooms")
        if self.room_size_range[0] < 2.0:
            raise DataError("rooms must be at least 2 m")
        if not self.category_pool:
            raise DataError("category pool must be non-empty")


@dataclass
class Episode:
    id: str
    map_id: str
    instruction: str
    start_pose: tuple  # (x, y, z, theta)
    gt_path: np.ndarray  # (k, 2) world xy
    goal: tuple  # (x, y, z)

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "map_id": self.map_id,
                "instruction": self.instruction,
                "start_pose": list(self.start_pose),
                "gt_path": [[float(x), float(y)] for x, y in self.gt_path],
                "goal": list(self.goal),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "Episode":
        d = json.loads(line)
        return cls(
            id=d["id"],
            map_id=d["map_id"],
            instruction=d["instruction"],
            start_pose=tuple(d["start_pose"]),
            gt_path=np.asarray(d["gt_path"], dtype=np.float64),
            goal=tuple(d["goal"]),
        )

    def proposal_seed(self) -> int:
        """Stable proposer seed tied to the episode id."""
        return zlib.crc32(self.id.encode("utf-8"))


def save_episodes(episodes, path):
    with open(path, "w", encoding="utf-8") as fh:
        for ep in episodes:
            fh.write(ep.to_json() + "\n")


def load_episodes(path):
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(Episode.from_json(line))
    return out


# -- map generation ---------------------------------------------------------------


def generate_map(spec: EnvSpec, categories: CategoryTable | None = None) -> SemanticVoxelMap:
    """Deterministic room-grid map; single connected navigable component."""
    categories = categories or CategoryTable.bundled()
    for attempt in range(10):
        rng = np.random.default_rng([spec.seed, attempt, 0xE17])
        built = _build_map(spec, categories, rng)
        if built is not None:
            return built
    raise DataError(f"could not build a connected map for seed {spec.seed}")


def _build_map(spec, categories, rng):
    res = spec.resolution
    rows, cols = spec.grid_rooms
    lo, hi = spec.room_size_range
    col_cells = [int(round(rng.uniform(lo, hi) / res)) for _ in range(cols)]
    row_cells = [int(round(rng.uniform(lo, hi) / res)) for _ in range(rows)]
    nx = sum(col_cells) + (cols + 1) * WALL_T
    ny = sum(row_cells) + (rows + 1) * WALL_T

    # room interiors: (x0, x1, y0, y1) half-open cell rects
    rooms = {}
    x0 = WALL_T
    for j, w in enumerate(col_cells):
        y0 = WALL_T
        for i, h in enumerate(row_cells):
            rooms[(i, j)] = (x0, x0 + w, y0, y0 + h)
            y0 += h + WALL_T
        x0 += w + WALL_T

    wall = np.ones((nx, ny), dtype=bool)
    for (x0, x1, y0, y1) in rooms.values():
        wall[x0:x1, y0:y1] = False

    door_clear = np.zeros((nx, ny), dtype=bool)

    def carve(xa, xb, ya, yb):
        wall[xa:xb, ya:yb] = False
        door_clear[
            max(0, xa - DOOR_CLEAR): xb + DOOR_CLEAR,
            max(0, ya - DOOR_CLEAR): yb + DOOR_CLEAR,
        ] = True

    for (i, j), (x0, x1, y0, y1) in sorted(rooms.items()):
        if (i, j + 1) in rooms:  # door in the vertical wall to the right
            n0, n1 = rooms[(i, j + 1)][2], rooms[(i, j + 1)][3]
            oy0, oy1 = max(y0, n0), min(y1, n1)
            gy = int(rng.integers(oy0 + 2, oy1 - 2 - DOOR_W + 1))
            carve(x1, x1 + WALL_T, gy, gy + DOOR_W)
        if (i + 1, j) in rooms:  # door in the horizontal wall above
            n0, n1 = rooms[(i + 1, j)][0], rooms[(i + 1, j)][1]
            ox0, ox1 = max(x0, n0), min(x1, n1)
            gx = int(rng.integers(ox0 + 2, ox1 - 2 - DOOR_W + 1))
            carve(gx, gx + DOOR_W, y1, y1 + WALL_T)

    # objects: (instance, category_id, x, y, w, d, h)
    occupied = wall.copy()
    placements = []
    o_lo, o_hi = spec.objects_per_room_range
    for key in sorted(rooms):
        x0, x1, y0, y1 = rooms[key]
        count = int(rng.integers(o_lo, o_hi + 1)) if o_hi > 0 else 0
        placed = 0
        tries = 0
        while placed < count and tries < 40:
            tries += 1
            label = spec.category_pool[int(rng.integers(len(spec.category_pool)))]
            base = OBJECT_SIZES.get(label, DEFAULT_SIZE)
            jitter = rng.uniform(0.85, 1.15, size=3)
            w_m, d_m, h_m = (base[0] * jitter[0], base[1] * jitter[1], base[2] * jitter[2])
            if rng.integers(2):
                w_m, d_m = d_m, w_m
            w_c = max(2, int(round(w_m / res)))
            d_c = max(2, int(round(d_m / res)))
            h_c = max(2, int(round(h_m / res)))
            if x1 - x0 - 2 * ROOM_MARGIN <= w_c or y1 - y0 - 2 * ROOM_MARGIN <= d_c:
                continue
            px = int(rng.integers(x0 + ROOM_MARGIN, x1 - ROOM_MARGIN - w_c + 1))
            py = int(rng.integers(y0 + ROOM_MARGIN, y1 - ROOM_MARGIN - d_c + 1))
            region = (slice(px, px + w_c), slice(py, py + d_c))
            if occupied[region].any() or door_clear[region].any():
                continue
            occupied[region] = True
            placements.append(
                (len(placements), categories.id_of(label), px, py, w_c, d_c, h_c)
            )
            placed += 1

    footprint = occupied & ~wall
    nav2d = ~wall & ~footprint
    labels, n_comp = ndimage.label(nav2d)
    if n_comp != 1:
        return None
    for _, _, px, py, w_c, d_c, _ in placements:
        cx, cy = px + w_c // 2, py + d_c // 2
        r = int(round(0.75 / res))
        window = nav2d[max(0, cx - r): cx + r + 1, max(0, cy - r): cy + r + 1]
        if not window.any():
            return None  # object unreachable as a landmark target

    nz = max([p[6] for p in placements], default=4) + 2
    voxels = _assemble_voxels(nav2d, wall, placements, nz)
    map_id = spec.map_id or f"env-{spec.seed:08d}"
    return SemanticVoxelMap(res, (nx, ny, nz), (0.0, 0.0, 0.0), voxels, map_id=map_id)


def _assemble_voxels(nav2d, wall, placements, nz):
    parts = []

    def block(xs, ys, zs, inst, cat, nav):
        arr = np.zeros(len(xs), dtype=_VOXEL_DTYPE)
        arr["ix"], arr["iy"], arr["iz"] = xs, ys, zs
        arr["instance"] = inst
        arr["category"] = cat
        arr["navigable"] = nav
        return arr

    floor = np.argwhere(nav2d)
    parts.append(block(floor[:, 0], floor[:, 1], np.zeros(len(floor), np.int64), -1, -1, 1))
    walls = np.argwhere(wall)
    parts.append(block(walls[:, 0], walls[:, 1], np.zeros(len(walls), np.int64), -1, -1, 0))
    for inst, cat, px, py, w_c, d_c, h_c in placements:
        xs, ys, zs = np.meshgrid(
            np.arange(px, px + w_c),
            np.arange(py, py + d_c),
            np.arange(1, 1 + h_c),
            indexing="ij",
        )
        parts.append(block(xs.ravel(), ys.ravel(), zs.ravel(), inst, cat, 0))
    return np.concatenate(parts)


# -- instruction synthesis ----------------------------------------------------------


def verbalize(vmap, path, seed=0, paraphrase_prob=0.3, categories=None):
    """Templated instruction for a path: turn, walk-past, and stop clauses."""
    pts = np.asarray(path, dtype=np.float64)
    if len(pts) < 2:
        raise DataError("verbalize needs a path with at least 2 waypoints")
    categories = categories or CategoryTable.bundled()
    rng = np.random.default_rng([seed, 0x7E47])

    def word_for(category_id):
        label = categories.label_of(category_id)
        options = PARAPHRASES.get(label)
        if options and rng.random() < paraphrase_prob:
            return options[int(rng.integers(len(options)))]
        return label

    keypoints = resample_polyline(pts, 1.0)
    headings = segment_headings(keypoints)
    segments = []  # lists of keypoint indices
    turns = []  # direction strings between segments
    seg_start = 0
    acc = 0.0
    for i in range(len(keypoints) - 2):
        acc += wrap_angle(headings[i + 1] - headings[i])
        if abs(acc) > np.deg2rad(TURN_CLAUSE_DEG):
            segments.append((seg_start, i + 1))
            turns.append("left" if acc > 0 else "right")
            seg_start = i + 1
            acc = 0.0
    segments.append((seg_start, len(keypoints) - 1))

    clauses = []
    last_instance = None
    stride = max(1, int(round(MENTION_STRIDE_M)))  # keypoints are ~1 m apart
    for k, (a, b) in enumerate(segments):
        # narrate objects passed along the segment, not just one at the middle
        marks = list(range(a + stride // 2, b, stride)) or [(a + b) // 2]
        for j in marks:
            pt = keypoints[j]
            near = vmap.radius_query((pt[0], pt[1], 0.0), LANDMARK_RADIUS_M)
            if near and near[0].instance_id != last_instance:
                clauses.append(f"walk past the {word_for(near[0].category_id)}")
                last_instance = near[0].instance_id
        if k < len(turns):
            clauses.append(TURN_TEMPLATES[turns[k]][int(rng.integers(3))])
    goal = pts[-1]
    objs = vmap.instances()
    if objs:
        dists = [
            (np.hypot(o.centroid[0] - goal[0], o.centroid[1] - goal[1]), o.instance_id, o)
            for o in objs
        ]
        nearest = min(dists)[2]
        clauses.append(f"stop near the {word_for(nearest.category_id)}")
    if not clauses:
        clauses.append("walk straight ahead")
    return ". ".join(clauses) + "."


# -- episodes ---------------------------------------------------------------------


def generate_episode(
    vmap,
    seed,
    episode_id=None,
    grid=None,
    clusters=None,
    parser=None,
    limits=None,
    min_len=4.0,
    max_len=20.0,
    min_euclid=0.0,
    goal_near_m=0.0,
    validate=True,
    max_tries=40,
    cache=None,
):
    """Sample an episode whose instruction supports discriminative proposals.

    The ground-truth path is the A* shortest path between a sampled
    navigable start and goal with geodesic length in [min_len, max_len];
    min_euclid additionally keeps the goal from curling back near the
    start, and goal_near_m > 0 restricts goals to cells within that
    distance of some object so the final stop clause is anchored. With
    validate=True, resamples until the proposal set has at least 3
    candidates, one that succeeds, and one that fails, so the episode is
    neither unsolvable nor trivial.
    """
    grid = grid if grid is not None else vmap.project_navgrid()
    if grid.cells.sum() == 0:
        raise DataError("map has no navigable cells")
    parser = parser or default_parser()
    limits = limits or ProposerLimits()
    if clusters is None:
        clusters = ClusterSet.build(vmap, eps=limits.eps, min_pts=limits.min_pts)
    if validate and not vmap.instances():
        raise DataError("validated episodes need at least one object instance")
    if cache is None:
        cache = SegmentCache(grid)
    rng = np.random.default_rng([seed, 0xEB15])
    nav = np.argwhere(grid.cells)
    episode_id = episode_id or f"{vmap.map_id}-ep{seed:06d}"

    near_goal = None
    if goal_near_m > 0 and vmap.instances():
        cents = np.array([o.centroid[:2] for o in vmap.instances()])
        xs = grid.origin[0] + (nav[:, 0] + 0.5) * grid.resolution
        ys = grid.origin[1] + (nav[:, 1] + 0.5) * grid.resolution
        d, _ = cKDTree(cents).query(np.stack([xs, ys], axis=1))
        near_goal = np.zeros(grid.dims, dtype=bool)
        near_goal[nav[:, 0], nav[:, 1]] = d <= goal_near_m

    for _ in range(max_tries):
        start_cell = tuple(nav[int(rng.integers(len(nav)))])
        dist = distance_field(grid, start_cell, max_len)
        mask = np.isfinite(dist) & (dist >= min_len)
        if min_euclid > 0:
            res = grid.resolution
            dx = (np.arange(grid.dims[0]) - start_cell[0])[:, None] * res
            dy = (np.arange(grid.dims[1]) - start_cell[1])[None, :] * res
            mask &= dx * dx + dy * dy >= min_euclid * min_euclid
        if near_goal is not None:
            mask &= near_goal
        goals = np.argwhere(mask)
        if len(goals) == 0:
            continue
        goal_cell = tuple(goals[int(rng.integers(len(goals)))])
        planned = astar(grid, start_cell, goal_cell)
        if planned is None:
            continue
        cell_path, _ = planned
        world = np.array(
            [grid.cell_to_world(x, y) for x, y in cell_path], dtype=np.float64
        )
        theta = float(segment_headings(world)[0])
        instruction = verbalize(vmap, world, seed=int(rng.integers(2 ** 31)))
        ep = Episode(
            id=episode_id,
            map_id=vmap.map_id,
            instruction=instruction,
            start_pose=(float(world[0, 0]), float(world[0, 1]), 0.0, theta),
            gt_path=world,
            goal=(float(world[-1, 0]), float(world[-1, 1]), 0.0),
        )
        if not validate:
            return ep
        components = parser.extract_key_components(instruction)
        if not any(c.kind == LANDMARK for c in components):
            continue
        cands = propose(
            vmap,
            grid,
            components,
            (ep.start_pose[0], ep.start_pose[1], theta),
            seed=ep.proposal_seed(),
            limits=limits,
            clusters=clusters,
            cache=cache,
        )
        if len(cands) < 3:
            continue
        errors = [
            float(np.hypot(c.endpoint[0] - ep.goal[0], c.endpoint[1] - ep.goal[1]))
            for c in cands
        ]
        if min(errors) > 3.0 or max(errors) <= 3.0:
            continue  # unsolvable, or every candidate trivially succeeds
        return ep
    raise DataError(f"episode sampling failed on map {vmap.map_id} (seed {seed})")


# -- rendering ---------------------------------------------------------------------


def category_color(category_id):
    h = (category_id * 0.618034) % 1.0
    r, g, b = colorsys.hsv_to_rgb(h, 0.65, 0.9)
    return int(r * 255), int(g * 255), int(b * 255)


PATH_COLORS = [(220, 20, 20), (20, 60, 220), (20, 160, 60), (230, 140, 0), (140, 20, 200)]


def render(vmap, paths, out_path, pixels_per_cell=2):
    """Top-down PNG: navigable cells, objects by category, overlaid paths."""
    from PIL import Image, ImageDraw

    nx, ny, _ = vmap.dims
    grid = vmap.project_navgrid()
    cat2d = np.full((nx, ny), -1, dtype=np.int64)
    v = vmap.voxels
    labeled = v["category"] >= 0
    cat2d[v["ix"][labeled].astype(np.int64), v["iy"][labeled].astype(np.int64)] = v[
        "category"
    ][labeled]

    p = pixels_per_cell
    img = Image.new("RGB", (nx * p, ny * p), (40, 40, 40))
    draw = ImageDraw.Draw(img)
    for ix in range(nx):
        for iy in range(ny):
            if cat2d[ix, iy] >= 0:
                color = category_color(int(cat2d[ix, iy]))
            elif grid.cells[ix, iy]:
                color = (245, 245, 245)
            else:
                continue
            py = (ny - 1 - iy) * p
            draw.rectangle([ix * p, py, ix * p + p - 1, py + p - 1], fill=color)

    def to_px(pt):
        ix = (pt[0] - vmap.origin[0]) / vmap.resolution
        iy = (pt[1] - vmap.origin[1]) / vmap.resolution
        return ix * p, (ny - iy) * p

    for k, path in enumerate(paths):
        pts = [to_px(pt) for pt in np.asarray(path, dtype=np.float64)]
        if len(pts) >= 2:
            draw.line(pts, fill=PATH_COLORS[k % len(PATH_COLORS)], width=max(2, p))
        if pts:
            x, y = pts[0]
            draw.ellipse([x - 3, y - 3, x + 3, y + 3], fill=(0, 0, 0))
    img.save(out_path, format="PNG")
