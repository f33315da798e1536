import numpy as np

from ippd.clustering import NOISE, dbscan


def test_singletons_far_apart():
    pts = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    labels, core = dbscan(pts, eps=0.5, min_pts=1)
    assert labels.tolist() == [0, 1, 2]
    assert core.all()


def test_chain_merges_transitively():
    # consecutive gaps 0.4 <= eps link the whole chain into one cluster
    pts = np.array([[0.0, 0.0], [0.4, 0.0], [0.8, 0.0], [1.2, 0.0]])
    labels, _ = dbscan(pts, eps=0.5, min_pts=1)
    assert labels.tolist() == [0, 0, 0, 0]


def test_eps_boundary_is_closed():
    pts = np.array([[0.0, 0.0], [0.5, 0.0], [1.01, 0.0]])
    labels, _ = dbscan(pts, eps=0.5, min_pts=1)
    assert labels[0] == labels[1]
    assert labels[2] != labels[0]


def test_labels_follow_input_order():
    pts = np.array([[5.0, 5.0], [0.0, 0.0], [5.1, 5.0]])
    labels, _ = dbscan(pts, eps=0.5, min_pts=1)
    # first point seeds cluster 0 even though it sorts later spatially
    assert labels[0] == 0
    assert labels[1] == 1
    assert labels[2] == 0


def test_min_pts_two_produces_noise():
    pts = np.array([[0.0, 0.0], [0.2, 0.0], [9.0, 9.0]])
    labels, core = dbscan(pts, eps=0.5, min_pts=2)
    assert labels[2] == NOISE
    assert not core[2]
    assert labels[0] == labels[1] == 0


def test_border_point_joins_first_cluster():
    # middle point is within eps of both ends; ends are not core-linked
    pts = np.array([[0.0, 0.0], [0.4, 0.0], [0.8, 0.0]])
    labels, core = dbscan(pts, eps=0.5, min_pts=3)
    assert core.tolist() == [False, True, False]
    assert labels.tolist() == [0, 0, 0]


def test_empty_input():
    labels, core = dbscan(np.zeros((0, 2)), eps=0.5, min_pts=1)
    assert len(labels) == 0 and len(core) == 0
