"""Shared fixtures: one small procedurally generated map per session."""

import numpy as np
import pytest

from ippd.envgen import EnvSpec, generate_map
from ippd.instruction_parser import default_parser
from ippd.proposer import ClusterSet, SegmentCache


@pytest.fixture(scope="session")
def small_map():
    spec = EnvSpec(
        seed=1234,
        map_id="fixture",
        grid_rooms=(3, 3),
        room_size_range=(3.4, 4.2),
        objects_per_room_range=(3, 5),
    )
    return generate_map(spec)


@pytest.fixture(scope="session")
def small_grid(small_map):
    return small_map.project_navgrid()


@pytest.fixture(scope="session")
def small_clusters(small_map):
    return ClusterSet.build(small_map)


@pytest.fixture(scope="session")
def small_cache(small_grid):
    return SegmentCache(small_grid)


@pytest.fixture(scope="session")
def parser():
    return default_parser()


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
