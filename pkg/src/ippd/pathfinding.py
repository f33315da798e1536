"""Grid pathfinding on NavGrid: 8-connected A* and Dijkstra distance fields.

Step costs are 1 (axial) and sqrt(2) (diagonal) in cell units, scaled by
the grid resolution at the API boundary. Diagonal moves require both
adjacent axial cells to be free, so paths never cut corners. The inner
loops are numba kernels over flat arrays with a hand-rolled binary heap.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import ProposalError
from .semantic_map import NavGrid

SQRT2 = np.sqrt(2.0)

# fixed neighbor order: E N W S NE NW SW SE
_DX = np.array([1, 0, -1, 0, 1, -1, -1, 1], dtype=np.int64)
_DY = np.array([0, 1, 0, -1, 1, 1, -1, -1], dtype=np.int64)


@njit(cache=True)
def _heap_push(keys, nodes, size, key, node):
    i = size
    keys[i] = key
    nodes[i] = node
    while i > 0:
        p = (i - 1) // 2
        if keys[p] <= keys[i]:
            break
        keys[p], keys[i] = keys[i], keys[p]
        nodes[p], nodes[i] = nodes[i], nodes[p]
        i = p
    return size + 1


@njit(cache=True)
def _heap_pop(keys, nodes, size):
    top_key = keys[0]
    top_node = nodes[0]
    size -= 1
    keys[0] = keys[size]
    nodes[0] = nodes[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        small = left
        right = left + 1
        if right < size and keys[right] < keys[left]:
            small = right
        if keys[i] <= keys[small]:
            break
        keys[i], keys[small] = keys[small], keys[i]
        nodes[i], nodes[small] = nodes[small], nodes[i]
        i = small
    return top_key, top_node, size


@njit(cache=True)
def _octile(x, y, gx, gy):
    dx = abs(gx - x)
    dy = abs(gy - y)
    lo = dx if dx < dy else dy
    return (dx + dy) + (SQRT2 - 2.0) * lo


@njit(cache=True)
def _astar_kernel(cells, sx, sy, gx, gy):
    """Returns (cost_in_cells, parent array); cost < 0 when unreachable."""
    nx, ny = cells.shape
    n = nx * ny
    dist = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    closed = np.zeros(n, dtype=np.uint8)
    cap = 8 * n + 8
    heap_keys = np.empty(cap, dtype=np.float64)
    heap_nodes = np.empty(cap, dtype=np.int64)
    size = 0

    start = sx * ny + sy
    goal = gx * ny + gy
    dist[start] = 0.0
    size = _heap_push(heap_keys, heap_nodes, size, _octile(sx, sy, gx, gy), start)

    while size > 0:
        _, u, size = _heap_pop(heap_keys, heap_nodes, size)
        if closed[u]:
            continue
        closed[u] = 1
        if u == goal:
            return dist[goal], parent
        ux = u // ny
        uy = u % ny
        du = dist[u]
        for k in range(8):
            vx = ux + _DX[k]
            vy = uy + _DY[k]
            if vx < 0 or vx >= nx or vy < 0 or vy >= ny:
                continue
            if not cells[vx, vy]:
                continue
            if k >= 4:
                if not (cells[ux + _DX[k], uy] and cells[ux, uy + _DY[k]]):
                    continue
                step = SQRT2
            else:
                step = 1.0
            v = vx * ny + vy
            nd = du + step
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                size = _heap_push(
                    heap_keys, heap_nodes, size, nd + _octile(vx, vy, gx, gy), v
                )
    return -1.0, parent


@njit(cache=True)
def _dijkstra_kernel(cells, sx, sy, limit):
    """All-targets geodesic distances in cell units, inf beyond limit."""
    nx, ny = cells.shape
    n = nx * ny
    dist = np.full(n, np.inf)
    closed = np.zeros(n, dtype=np.uint8)
    cap = 8 * n + 8
    heap_keys = np.empty(cap, dtype=np.float64)
    heap_nodes = np.empty(cap, dtype=np.int64)
    size = 0

    start = sx * ny + sy
    dist[start] = 0.0
    size = _heap_push(heap_keys, heap_nodes, size, 0.0, start)

    while size > 0:
        d, u, size = _heap_pop(heap_keys, heap_nodes, size)
        if closed[u]:
            continue
        if d > limit:
            break
        closed[u] = 1
        ux = u // ny
        uy = u % ny
        du = dist[u]
        for k in range(8):
            vx = ux + _DX[k]
            vy = uy + _DY[k]
            if vx < 0 or vx >= nx or vy < 0 or vy >= ny:
                continue
            if not cells[vx, vy]:
                continue
            if k >= 4:
                if not (cells[ux + _DX[k], uy] and cells[ux, uy + _DY[k]]):
                    continue
                step = SQRT2
            else:
                step = 1.0
            v = vx * ny + vy
            nd = du + step
            if nd < dist[v] and nd <= limit:
                dist[v] = nd
                size = _heap_push(heap_keys, heap_nodes, size, nd, v)
    out = np.empty((nx, ny))
    for x in range(nx):
        for y in range(ny):
            u = x * ny + y
            out[x, y] = dist[u] if closed[u] else np.inf
    return out


def _check_cell(grid: NavGrid, cell, name):
    x, y = int(cell[0]), int(cell[1])
    if not (0 <= x < grid.dims[0] and 0 <= y < grid.dims[1]):
        raise ProposalError(f"{name} cell {cell} outside grid")
    if not grid.cells[x, y]:
        raise ProposalError(f"{name} cell {cell} is not navigable")
    return x, y


def astar(grid: NavGrid, start, goal):
    """Optimal 8-connected path as an (k, 2) int array, or None.

    Returns (path, cost_meters); cost is the sum of step costs times
    grid resolution.
    """
    sx, sy = _check_cell(grid, start, "start")
    gx, gy = _check_cell(grid, goal, "goal")
    if (sx, sy) == (gx, gy):
        return np.array([[sx, sy]], dtype=np.int64), 0.0
    cost, parent = _astar_kernel(grid.cells, sx, sy, gx, gy)
    if cost < 0:
        return None
    ny = grid.dims[1]
    node = gx * ny + gy
    rev = []
    while node >= 0:
        rev.append(node)
        node = parent[node]
    path = np.empty((len(rev), 2), dtype=np.int64)
    for i, nd in enumerate(reversed(rev)):
        path[i, 0] = nd // ny
        path[i, 1] = nd % ny
    return path, float(cost) * grid.resolution


def distance_field(grid: NavGrid, start, limit_m=np.inf):
    """Geodesic distance (meters) from start to every cell; inf if > limit."""
    sx, sy = _check_cell(grid, start, "start")
    limit = limit_m / grid.resolution if np.isfinite(limit_m) else np.inf
    field = _dijkstra_kernel(grid.cells, sx, sy, limit)
    return field * grid.resolution


def path_cost(path: np.ndarray, resolution: float) -> float:
    """Recompute the octile cost of a cell path (meters)."""
    if len(path) < 2:
        return 0.0
    diffs = np.abs(np.diff(np.asarray(path, dtype=np.int64), axis=0))
    steps = np.where(diffs.sum(axis=1) == 2, SQRT2, 1.0)
    return float(steps.sum()) * resolution
