import numpy as np
import pytest

from ippd.errors import ProposalError
from ippd.pathfinding import astar, distance_field, path_cost
from ippd.semantic_map import NavGrid

SQRT2 = np.sqrt(2.0)


def _grid(cells, resolution=1.0):
    cells = np.asarray(cells, dtype=bool)
    return NavGrid(
        resolution=resolution,
        dims=cells.shape,
        origin=(0.0, 0.0),
        cells=cells,
    )


def test_straight_line_cost():
    g = _grid(np.ones((5, 1)))
    path, cost = astar(g, (0, 0), (4, 0))
    assert cost == pytest.approx(4.0)
    assert [tuple(p) for p in path] == [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]


def test_diagonal_cost_is_sqrt2():
    g = _grid(np.ones((3, 3)))
    _, cost = astar(g, (0, 0), (2, 2))
    assert cost == pytest.approx(2 * SQRT2)


def test_no_corner_cutting():
    # wall at (1, 0) and (0, 1): the diagonal (0,0)->(1,1) must be blocked
    cells = np.ones((2, 2), dtype=bool)
    cells[1, 0] = False
    cells[0, 1] = False
    g = _grid(cells)
    assert astar(g, (0, 0), (1, 1)) is None


def test_diagonal_needs_one_free_side_blocked_too():
    # only one adjacent cardinal blocked still forbids the diagonal
    cells = np.ones((2, 2), dtype=bool)
    cells[1, 0] = False
    g = _grid(cells)
    path, cost = astar(g, (0, 0), (1, 1))
    assert [tuple(p) for p in path] == [(0, 0), (0, 1), (1, 1)]
    assert cost == pytest.approx(2.0)


def test_unreachable_returns_none():
    cells = np.ones((3, 3), dtype=bool)
    cells[1, :] = False
    g = _grid(cells)
    assert astar(g, (0, 0), (2, 0)) is None


def test_start_equals_goal():
    g = _grid(np.ones((2, 2)))
    path, cost = astar(g, (0, 0), (0, 0))
    assert cost == 0.0 and len(path) == 1


def test_blocked_endpoint_raises():
    cells = np.ones((2, 2), dtype=bool)
    cells[1, 1] = False
    g = _grid(cells)
    with pytest.raises(ProposalError):
        astar(g, (0, 0), (1, 1))
    with pytest.raises(ProposalError):
        astar(g, (5, 5), (0, 0))


def test_distance_field_matches_astar(rng):
    cells = rng.random((20, 20)) > 0.25
    cells[0, 0] = True
    g = _grid(cells)
    field = distance_field(g, (0, 0))
    for _ in range(30):
        ix, iy = int(rng.integers(20)), int(rng.integers(20))
        if not cells[ix, iy]:
            assert not np.isfinite(field[ix, iy])
            continue
        res = astar(g, (0, 0), (ix, iy))
        if res is None:
            assert not np.isfinite(field[ix, iy])
        else:
            assert field[ix, iy] == pytest.approx(res[1], abs=1e-9)


def test_distance_field_limit_truncates():
    g = _grid(np.ones((10, 1)))
    field = distance_field(g, (0, 0), limit_m=3.0)
    assert np.isfinite(field[3, 0])
    assert not np.isfinite(field[9, 0])


def test_distance_field_scales_with_resolution():
    g = _grid(np.ones((5, 1)), resolution=0.05)
    field = distance_field(g, (0, 0))
    assert field[4, 0] == pytest.approx(4 * 0.05)


def test_path_cost_matches_astar_cost(rng):
    cells = rng.random((30, 30)) > 0.3
    g = _grid(cells, resolution=0.5)
    nav = np.argwhere(cells)
    for _ in range(20):
        a = tuple(nav[int(rng.integers(len(nav)))])
        b = tuple(nav[int(rng.integers(len(nav)))])
        res = astar(g, a, b)
        if res is None:
            continue
        path, cost = res
        assert path_cost(path, g.resolution) == pytest.approx(cost, abs=1e-9)
