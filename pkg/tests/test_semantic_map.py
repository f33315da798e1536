import numpy as np
import pytest

from ippd.envgen import EnvSpec, generate_map
from ippd.errors import DataError, MapFormatError
from ippd.semantic_map import (
    CategoryTable,
    SemanticVoxelMap,
    load_map,
    save_map,
)


def test_bundled_categories():
    cats = CategoryTable.bundled()
    assert len(cats) == 40
    assert len(set(cats)) == 40
    for i, label in enumerate(cats):
        assert cats.id_of(label) == i
        assert cats.label_of(i) == label


def test_unknown_label_raises():
    cats = CategoryTable.bundled()
    with pytest.raises(KeyError):
        cats.id_of("not-a-category")


def _tiny_map():
    entries = [
        ((0, 0, 0), 1, 1, False),
        ((1, 0, 0), 1, 1, False),
        ((0, 1, 0), 2, 2, False),
        ((5, 5, 1), 3, 3, False),
        ((6, 6, 0), -1, 0, True),
    ]
    return SemanticVoxelMap.from_voxel_list(
        resolution=0.05, dims=(8, 8, 4), origin=(0.0, 0.0, 0.0),
        entries=entries, map_id="tiny",
    )


def test_voxel_world_round_trip():
    m = _tiny_map()
    idx = (3, 4, 2)
    assert m.world_to_voxel(m.voxel_to_world(idx)) == idx


def test_world_to_voxel_out_of_bounds():
    m = _tiny_map()
    from ippd.errors import MapBoundsError

    with pytest.raises(MapBoundsError):
        m.world_to_voxel((99.0, 0.0, 0.0))


def test_instances_group_by_instance_id():
    m = _tiny_map()
    inst = {o.instance_id: o for o in m.instances()}
    assert set(inst) == {1, 2, 3}
    assert inst[1].voxel_count == 2
    assert inst[1].category_id == 1


def test_radius_query_matches_brute_force(small_map, rng):
    lo, hi = small_map.bounds()
    inst = small_map.instances()
    for _ in range(20):
        c = np.array([rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1]), 0.0])
        r = rng.uniform(0.5, 4.0)
        got = {o.instance_id for o in small_map.radius_query(c, r)}
        want = {
            o.instance_id
            for o in inst
            if np.linalg.norm(np.asarray(o.centroid) - c) <= r
        }
        assert got == want


def test_radius_query_sorted_by_distance(small_map):
    lo, hi = small_map.bounds()
    c = np.array([(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, 0.0])
    hits = small_map.radius_query(c, 6.0)
    d = [np.linalg.norm(np.asarray(o.centroid) - c) for o in hits]
    assert d == sorted(d)


def test_save_load_round_trip(tmp_path, small_map):
    p = tmp_path / "m.map"
    save_map(small_map, p)
    again = load_map(p, map_id=small_map.map_id)
    assert again == small_map
    save_map(again, tmp_path / "m2.map")
    assert (tmp_path / "m.map").read_bytes() == (tmp_path / "m2.map").read_bytes()


def test_load_rejects_bad_magic(tmp_path, small_map):
    p = tmp_path / "m.map"
    save_map(small_map, p)
    raw = bytearray(p.read_bytes())
    raw[0] ^= 0xFF
    p.write_bytes(bytes(raw))
    with pytest.raises(MapFormatError):
        load_map(p)


def test_load_rejects_truncation(tmp_path, small_map):
    p = tmp_path / "m.map"
    save_map(small_map, p)
    p.write_bytes(p.read_bytes()[:-3])
    with pytest.raises(MapFormatError):
        load_map(p)


def test_navgrid_marks_objects_as_obstacles(small_map):
    grid = small_map.project_navgrid()
    assert grid.cells.any()
    # every object footprint must be non-navigable
    for o in small_map.instances():
        ix, iy = grid.world_to_cell(o.centroid[0], o.centroid[1])
        assert not grid.is_navigable(ix, iy)


def test_generate_map_deterministic():
    spec = EnvSpec(seed=9, map_id="d", grid_rooms=(3, 3),
                   room_size_range=(3.4, 4.2))
    assert generate_map(spec) == generate_map(spec)
