"""3D semantic voxel maps: data model, persistence, and spatial queries.

A map is a sparse set of labeled voxels over a regular grid. Each voxel
carries an optional object instance id, an optional category id, and a
navigable bit. The 2D navigable projection (NavGrid) is what the path
planners operate on; instance centroids are what the object queries
return.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, MapBoundsError, MapFormatError

MAP_MAGIC = b"IPPDMAP1"
MAP_VERSION = 1
NUM_CATEGORIES = 40

# Little-endian, packed: 3*u32 index, i32 instance, i32 category, u8 navigable.
_VOXEL_DTYPE = np.dtype(
    [
        ("ix", "<u4"),
        ("iy", "<u4"),
        ("iz", "<u4"),
        ("instance", "<i4"),
        ("category", "<i4"),
        ("navigable", "u1"),
    ]
)

_BUCKET_SIZE = 1.0  # meters; uniform grid that accelerates radius queries


class CategoryTable:
    """The fixed set of 40 object category labels with stable integer ids."""

    def __init__(self, labels):
        labels = list(labels)
        if len(labels) != NUM_CATEGORIES:
            raise DataError(f"expected {NUM_CATEGORIES} categories, got {len(labels)}")
        if len(set(labels)) != len(labels):
            raise DataError("category labels must be unique")
        for label in labels:
            if not label or label != label.lower():
                raise DataError(f"category labels must be non-empty lowercase: {label!r}")
        self.labels = labels
        self._ids = {label: i for i, label in enumerate(labels)}

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def id_of(self, label: str) -> int:
        return self._ids[label]

    def label_of(self, category_id: int) -> str:
        return self.labels[category_id]

    def __contains__(self, label: str) -> bool:
        return label in self._ids

    @classmethod
    def load(cls, path) -> "CategoryTable":
        with open(path, "r", encoding="utf-8") as fh:
            labels = [line.strip() for line in fh if line.strip()]
        return cls(labels)

    @classmethod
    def bundled(cls) -> "CategoryTable":
        text = importlib.resources.files("ippd.assets").joinpath("categories.txt").read_text("utf-8")
        return cls([line.strip() for line in text.splitlines() if line.strip()])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.labels) + "\n")


@dataclass(frozen=True)
class ObjectInstance:
    """One labeled object: centroid of its member voxel centers."""

    instance_id: int
    category_id: int
    centroid: tuple
    voxel_count: int


@dataclass
class NavGrid:
    """2D navigable projection of a map (single-floor 2.5D)."""

    resolution: float
    dims: tuple
    origin: tuple
    cells: np.ndarray  # bool, shape (nx, ny)

    def world_to_cell(self, x: float, y: float) -> tuple:
        ix = int(np.floor((x - self.origin[0]) / self.resolution))
        iy = int(np.floor((y - self.origin[1]) / self.resolution))
        if not (0 <= ix < self.dims[0] and 0 <= iy < self.dims[1]):
            raise MapBoundsError(f"point ({x}, {y}) outside grid bounds")
        return ix, iy

    def cell_to_world(self, ix: int, iy: int) -> tuple:
        return (
            self.origin[0] + (ix + 0.5) * self.resolution,
            self.origin[1] + (iy + 0.5) * self.resolution,
        )

    def is_navigable(self, ix: int, iy: int) -> bool:
        return bool(self.cells[ix, iy])

    def navigable_cells(self) -> np.ndarray:
        """(n, 2) int array of navigable cell indices in row-major order."""
        xs, ys = np.nonzero(self.cells)
        return np.stack([xs, ys], axis=1)


class SemanticVoxelMap:
    """Sparse semantic voxel grid with navigability bits.

    Maps are immutable after construction; spatial indices are built
    lazily and cached.
    """

    def __init__(self, resolution, dims, origin, voxels: np.ndarray, map_id: str = ""):
        if resolution <= 0:
            raise DataError("resolution must be positive")
        self.resolution = float(resolution)
        self.dims = (int(dims[0]), int(dims[1]), int(dims[2]))
        self.origin = (float(origin[0]), float(origin[1]), float(origin[2]))
        if voxels.dtype != _VOXEL_DTYPE:
            raise DataError("voxel array has wrong dtype")
        self.voxels = voxels
        self.map_id = map_id
        self._validate()
        self._instances = None
        self._buckets = None

    @classmethod
    def from_voxel_list(cls, resolution, dims, origin, entries, map_id: str = ""):
        """Build from an iterable of ((ix, iy, iz), instance, category, navigable)."""
        arr = np.zeros(len(entries), dtype=_VOXEL_DTYPE)
        for i, (idx, inst, cat, nav) in enumerate(entries):
            arr[i] = (idx[0], idx[1], idx[2], inst, cat, 1 if nav else 0)
        return cls(resolution, dims, origin, arr, map_id=map_id)

    def _validate(self):
        v = self.voxels
        nx, ny, nz = self.dims
        if v.size:
            if int(v["ix"].max()) >= nx or int(v["iy"].max()) >= ny or int(v["iz"].max()) >= nz:
                raise DataError("voxel index outside map dims")
        inst = v["instance"]
        cat = v["category"]
        labeled = inst >= 0
        if labeled.any():
            pairs = {}
            for i, c in zip(inst[labeled].tolist(), cat[labeled].tolist()):
                if i in pairs and pairs[i] != c:
                    raise DataError(f"instance {i} has inconsistent categories {pairs[i]} and {c}")
                pairs[i] = c
            for i, c in pairs.items():
                if not (0 <= c < NUM_CATEGORIES):
                    raise DataError(f"instance {i} has invalid category {c}")

    # -- coordinate transforms -------------------------------------------------

    def world_to_voxel(self, point) -> tuple:
        """Floor-binning world-to-index transform; raises on out-of-bounds."""
        idx = []
        for axis in range(3):
            i = int(np.floor((point[axis] - self.origin[axis]) / self.resolution))
            if not 0 <= i < self.dims[axis]:
                raise MapBoundsError(f"point {tuple(point)} outside map bounds on axis {axis}")
            idx.append(i)
        return tuple(idx)

    def voxel_to_world(self, idx) -> tuple:
        """Center of the given voxel in world coordinates."""
        return tuple(self.origin[a] + (idx[a] + 0.5) * self.resolution for a in range(3))

    def bounds(self) -> tuple:
        """((xmin, ymin, zmin), (xmax, ymax, zmax)) world-space bounding box."""
        lo = self.origin
        hi = tuple(self.origin[a] + self.dims[a] * self.resolution for a in range(3))
        return lo, hi

    # -- object instances --------------------------------------------------------

    def instances(self):
        """All object instances, ordered by instance id."""
        if self._instances is None:
            v = self.voxels
            labeled = v["instance"] >= 0
            out = []
            if labeled.any():
                inst = v["instance"][labeled].astype(np.int64)
                cat = v["category"][labeled].astype(np.int64)
                centers = np.stack(
                    [
                        self.origin[0] + (v["ix"][labeled] + 0.5) * self.resolution,
                        self.origin[1] + (v["iy"][labeled] + 0.5) * self.resolution,
                        self.origin[2] + (v["iz"][labeled] + 0.5) * self.resolution,
                    ],
                    axis=1,
                )
                order = np.argsort(inst, kind="stable")
                inst, cat, centers = inst[order], cat[order], centers[order]
                uniq, starts = np.unique(inst, return_index=True)
                starts = list(starts) + [len(inst)]
                for k, iid in enumerate(uniq.tolist()):
                    lo, hi = starts[k], starts[k + 1]
                    centroid = centers[lo:hi].mean(axis=0)
                    out.append(
                        ObjectInstance(
                            instance_id=iid,
                            category_id=int(cat[lo]),
                            centroid=(float(centroid[0]), float(centroid[1]), float(centroid[2])),
                            voxel_count=hi - lo,
                        )
                    )
            self._instances = out
        return list(self._instances)

    def instances_of(self, category_id: int):
        return [o for o in self.instances() if o.category_id == category_id]

    def _bucket_index(self):
        if self._buckets is None:
            buckets = {}
            for i, obj in enumerate(self.instances()):
                key = tuple(int(np.floor(c / _BUCKET_SIZE)) for c in obj.centroid)
                buckets.setdefault(key, []).append(i)
            self._buckets = buckets
        return self._buckets

    def radius_query(self, center, r: float):
        """Instances whose centroid lies within the closed ball of radius r.

        Sorted by (distance, instance_id). Uses the 1 m bucket grid; the
        linear scan over all instances is the correctness oracle.
        """
        if r <= 0:
            raise ValueError("radius must be positive")
        objs = self.instances()
        if not objs:
            return []
        buckets = self._bucket_index()
        c = np.asarray(center, dtype=np.float64)
        lo = [int(np.floor((c[a] - r) / _BUCKET_SIZE)) for a in range(3)]
        hi = [int(np.floor((c[a] + r) / _BUCKET_SIZE)) for a in range(3)]
        hits = []
        for bx in range(lo[0], hi[0] + 1):
            for by in range(lo[1], hi[1] + 1):
                for bz in range(lo[2], hi[2] + 1):
                    for i in buckets.get((bx, by, bz), ()):
                        obj = objs[i]
                        d = float(np.linalg.norm(np.asarray(obj.centroid) - c))
                        if d <= r:
                            hits.append((d, obj.instance_id, obj))
        hits.sort(key=lambda t: (t[0], t[1]))
        return [obj for _, _, obj in hits]

    # -- projections ----------------------------------------------------------

    def project_navgrid(self) -> NavGrid:
        """Per-column OR of navigable bits over z."""
        nx, ny, _ = self.dims
        cells = np.zeros((nx, ny), dtype=bool)
        v = self.voxels
        nav = v["navigable"] != 0
        if nav.any():
            cells[v["ix"][nav].astype(np.int64), v["iy"][nav].astype(np.int64)] = True
        return NavGrid(
            resolution=self.resolution,
            dims=(nx, ny),
            origin=(self.origin[0], self.origin[1]),
            cells=cells,
        )

    # -- equality ---------------------------------------------------------------

    def _canonical_voxels(self) -> np.ndarray:
        v = self.voxels
        order = np.lexsort((v["iz"], v["iy"], v["ix"]))
        return v[order]

    def __eq__(self, other):
        if not isinstance(other, SemanticVoxelMap):
            return NotImplemented
        return (
            self.resolution == other.resolution
            and self.dims == other.dims
            and self.origin == other.origin
            and np.array_equal(self._canonical_voxels(), other._canonical_voxels())
        )

    def __repr__(self):
        return (
            f"SemanticVoxelMap(id={self.map_id!r}, dims={self.dims}, "
            f"res={self.resolution}, voxels={len(self.voxels)})"
        )


def save_map(vmap: SemanticVoxelMap, path) -> None:
    """Write the versioned little-endian binary format; byte-deterministic."""
    header = bytearray()
    header += MAP_MAGIC
    header += np.uint32(MAP_VERSION).tobytes()
    header += np.float64(vmap.resolution).tobytes()
    header += np.asarray(vmap.dims, dtype="<u4").tobytes()
    header += np.asarray(vmap.origin, dtype="<f8").tobytes()
    voxels = vmap._canonical_voxels()
    header += np.uint64(len(voxels)).tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(header))
        fh.write(voxels.tobytes())


def load_map(path, map_id: str = "") -> SemanticVoxelMap:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8 + 4 + 8 + 12 + 24 + 8:
        raise MapFormatError("map file truncated (header)")
    if blob[:8] != MAP_MAGIC:
        raise MapFormatError("bad magic number")
    off = 8
    version = int(np.frombuffer(blob, "<u4", count=1, offset=off)[0])
    off += 4
    if version != MAP_VERSION:
        raise MapFormatError(f"unsupported map version {version}")
    resolution = float(np.frombuffer(blob, "<f8", count=1, offset=off)[0])
    off += 8
    dims = tuple(int(x) for x in np.frombuffer(blob, "<u4", count=3, offset=off))
    off += 12
    origin = tuple(float(x) for x in np.frombuffer(blob, "<f8", count=3, offset=off))
    off += 24
    count = int(np.frombuffer(blob, "<u8", count=1, offset=off)[0])
    off += 8
    expected = off + count * _VOXEL_DTYPE.itemsize
    if len(blob) != expected:
        raise MapFormatError(f"map payload size mismatch: {len(blob)} != {expected}")
    voxels = np.frombuffer(blob, _VOXEL_DTYPE, count=count, offset=off).copy()
    try:
        return SemanticVoxelMap(resolution, dims, origin, voxels, map_id=map_id)
    except DataError as exc:
        raise MapFormatError(str(exc)) from exc
