import numpy as np
import pytest

from ippd.geometry import polyline_length
from ippd.instruction_parser import LANDMARK, TURN_LEFT, TURN_RIGHT, KeyComponent
from ippd.pathfinding import distance_field
from ippd.proposer import (
    ClusterSet,
    ProposerLimits,
    SegmentCache,
    _nearest_cell,
    propose,
    random_baseline,
    turn_filter,
    wrap_angle,
)


def _all_clusters(cs):
    return [c for group in cs.by_category.values() for c in group]


def test_clusterset_build_covers_instances(small_map, small_clusters):
    clusters = _all_clusters(small_clusters)
    total = sum(len(c.member_ids) for c in clusters)
    assert total == len(small_map.instances())
    by_id = {o.instance_id: o for o in small_map.instances()}
    for c in clusters:
        cats = {by_id[m].category_id for m in c.member_ids}
        assert cats == {c.category_id}


def test_clusters_of_filters_by_category(small_clusters):
    for cid in small_clusters.by_category:
        got = small_clusters.clusters_of(cid)
        assert got and all(c.category_id == cid for c in got)
    assert small_clusters.clusters_of(-99) == []


def test_turn_filter_boundaries():
    pose = (0.0, 0.0, 0.0)  # facing +x
    just_inside_left = (np.cos(np.deg2rad(16)), np.sin(np.deg2rad(16)))
    below_15 = (np.cos(np.deg2rad(14.9)), np.sin(np.deg2rad(14.9)))
    above_165 = (np.cos(np.deg2rad(165.1)), np.sin(np.deg2rad(165.1)))
    inside_wide = (np.cos(np.deg2rad(164.9)), np.sin(np.deg2rad(164.9)))
    kept = turn_filter(pose, [just_inside_left, below_15, above_165, inside_wide], TURN_LEFT)
    assert just_inside_left in kept
    assert inside_wide in kept
    assert below_15 not in kept  # outside the open interval
    assert above_165 not in kept


def test_turn_filter_sign():
    pose = (0.0, 0.0, 0.0)
    left_pt = (1.0, 1.0)  # +45 deg
    right_pt = (1.0, -1.0)
    assert turn_filter(pose, [left_pt, right_pt], TURN_LEFT) == [left_pt]
    assert turn_filter(pose, [left_pt, right_pt], TURN_RIGHT) == [right_pt]


def _components_for(parser, small_map, text):
    return parser.extract_key_components(text)


def _start_pose(grid):
    nav = np.argwhere(grid.cells)
    cell = nav[len(nav) // 2]
    x, y = grid.cell_to_world(*cell)
    return (x, y, 0.0)


def test_propose_empty_without_landmarks(small_map, small_grid, small_clusters):
    comps = [KeyComponent.turn("left", 0)]
    out = propose(small_map, small_grid, comps, _start_pose(small_grid),
                  clusters=small_clusters)
    assert out == []


def test_propose_visits_in_component_order(small_map, small_grid, small_clusters, parser, small_cache):
    labels = sorted({parser.categories.label_of(c.category_id)
                     for c in _all_clusters(small_clusters)})
    text = f"walk past the {labels[0]} and walk past the {labels[1]} and stop"
    comps = parser.extract_key_components(text)
    landmark_ids = [c.category_id for c in comps if c.kind == LANDMARK]
    if len(landmark_ids) < 2:
        pytest.skip("fixture lacks two parseable labels")
    out = propose(small_map, small_grid, comps, _start_pose(small_grid),
                  clusters=small_clusters, cache=small_cache)
    for cand in out:
        visited = [v.category_id for v in cand.visited_landmarks]
        assert visited == landmark_ids
        idx = [v.component_index for v in cand.visited_landmarks]
        assert idx == sorted(idx)


def test_propose_respects_segment_bound(small_map, small_grid, small_clusters, parser, small_cache):
    limits = ProposerLimits()
    labels = sorted({parser.categories.label_of(c.category_id)
                     for c in _all_clusters(small_clusters)})
    text = " and ".join(f"walk past the {l}" for l in labels[:3])
    comps = parser.extract_key_components(text)
    out = propose(small_map, small_grid, comps, _start_pose(small_grid),
                  clusters=small_clusters, cache=small_cache, limits=limits)
    cache = SegmentCache(small_grid)
    for cand in out[:20]:
        prev = small_grid.world_to_cell(cand.waypoints[0, 0], cand.waypoints[0, 1])
        for v in cand.visited_landmarks:
            core_cell = _nearest_cell(small_grid, v.core)
            seg = cache.segment(prev, core_cell)
            assert seg is not None and seg[1] <= limits.max_segment_m + 1e-9
            prev = core_cell


def test_propose_deterministic(small_map, small_grid, small_clusters, parser, small_cache):
    labels = sorted({parser.categories.label_of(c.category_id)
                     for c in _all_clusters(small_clusters)})
    comps = parser.extract_key_components(f"walk past the {labels[0]}")
    a = propose(small_map, small_grid, comps, _start_pose(small_grid), seed=5,
                clusters=small_clusters, cache=small_cache)
    b = propose(small_map, small_grid, comps, _start_pose(small_grid), seed=5,
                clusters=small_clusters, cache=small_cache)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert np.array_equal(x.waypoints, y.waypoints)


def test_candidate_endpoints_near_final_core(small_map, small_grid, small_clusters, parser, small_cache):
    limits = ProposerLimits()
    labels = sorted({parser.categories.label_of(c.category_id)
                     for c in _all_clusters(small_clusters)})
    comps = parser.extract_key_components(f"walk past the {labels[0]}")
    out = propose(small_map, small_grid, comps, _start_pose(small_grid),
                  clusters=small_clusters, cache=small_cache, limits=limits)
    assert out
    for cand in out:
        final = cand.visited_landmarks[-1]
        core_cell = _nearest_cell(small_grid, final.core)
        field = distance_field(small_grid, core_cell, limits.endpoint_radius_m + 0.1)
        end_cell = small_grid.world_to_cell(cand.endpoint[0], cand.endpoint[1])
        assert field[end_cell] <= limits.endpoint_radius_m + 1e-9


def test_random_baseline_reaches_target_length(small_grid):
    rng = np.random.default_rng(0)
    for seed in range(5):
        cand = random_baseline(small_grid, _start_pose(small_grid), seed=seed)
        L = polyline_length(cand.waypoints)
        target = float(np.clip(np.random.default_rng([seed, 0xBA5E]).normal(8.89, 2.67), 1.0, 20.0))
        # target is drawn inside the function; just check the walk moved
        assert L >= 1.0
        for x, y in cand.waypoints[:: max(1, len(cand.waypoints) // 10)]:
            cell = small_grid.world_to_cell(x, y)
            assert small_grid.is_navigable(*cell)


def test_random_baseline_deterministic(small_grid):
    a = random_baseline(small_grid, _start_pose(small_grid), seed=3)
    b = random_baseline(small_grid, _start_pose(small_grid), seed=3)
    assert np.array_equal(a.waypoints, b.waypoints)
