import json

import numpy as np
import pytest

from ippd.errors import DataError
from ippd.metrics import (
    EvalReport,
    dtw,
    evaluate,
    navigation_error,
    ndtw,
    oracle_success,
    spl,
    success,
    trajectory_length,
)


def test_dtw_identical_paths_is_zero():
    p = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    assert dtw(p, p) == 0.0
    assert ndtw(p, p) == 1.0


def test_dtw_hand_value():
    a = np.array([[0.0, 0.0], [1.0, 0.0]])
    b = np.array([[0.0, 1.0], [1.0, 1.0]])
    # optimal alignment pairs points index-by-index: cost 1 + 1
    assert dtw(a, b) == pytest.approx(2.0)
    assert ndtw(a, b) == pytest.approx(np.exp(-2.0 / (2 * 3.0)))


def test_dtw_repeats_absorb_extra_points():
    a = np.array([[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    b = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert dtw(a, b) == 0.0


def test_navigation_error_uses_last_point():
    p = np.array([[0.0, 0.0], [3.0, 4.0]])
    assert navigation_error(p, (0.0, 0.0)) == pytest.approx(5.0)


def test_success_threshold():
    p = np.array([[0.0, 0.0], [2.9, 0.0]])
    assert success(p, (6.0, 0.0)) == 0  # NE 3.1 just over the 3 m threshold
    assert success(p, (0.0, 0.0)) == 1  # NE 2.9 just under
    assert success(np.array([[0.0, 0.0], [3.0, 0.0]]), (0.0, 0.0)) == 1  # inclusive


def test_oracle_success_scans_whole_path():
    p = np.array([[0.0, 0.0], [5.0, 0.0], [10.0, 0.0]])
    assert oracle_success(p, (5.5, 0.0)) == 1
    assert success(p, (5.5, 0.0)) == 0


def test_trajectory_length():
    p = np.array([[0.0, 0.0], [3.0, 0.0], [3.0, 4.0]])
    assert trajectory_length(p) == pytest.approx(7.0)


def test_spl_penalizes_detours():
    assert spl(1, 10.0, 20.0) == pytest.approx(0.5)
    assert spl(1, 10.0, 5.0) == 1.0  # shorter than gt never exceeds 1
    assert spl(0, 10.0, 10.0) == 0.0


def test_ndtw_rejects_empty_path():
    with pytest.raises(DataError):
        ndtw(np.zeros((0, 2)), np.array([[0.0, 0.0]]))


def _toy_episode(eid):
    class Ep:
        id = eid
        gt_path = np.array([[0.0, 0.0], [4.0, 0.0]])
        goal = (4.0, 0.0, 0.0)

    return Ep()


def test_evaluate_aggregates_means(tmp_path):
    eps = [_toy_episode("e0"), _toy_episode("e1")]
    good = np.array([[0.0, 0.0], [4.0, 0.0]])
    bad = np.array([[0.0, 0.0], [0.0, 8.0]])
    rep = evaluate(eps, {"e0": (good, 0), "e1": (bad, 1)}, split="eval_seen", agent="x")
    agg = rep.aggregate()
    assert len(rep.records) == 2
    assert agg["SR"] == pytest.approx(0.5)
    assert agg["NE"] == pytest.approx((0.0 + np.hypot(4.0, 8.0)) / 2)

    out = tmp_path / "r.json"
    rep.write_json(out)
    rt = EvalReport.read_json(out)
    assert rt.aggregate() == agg and rt.agent == "x"


def test_evaluate_missing_prediction_raises():
    ep = _toy_episode("e0")
    with pytest.raises(DataError):
        evaluate([ep], {}, split="eval_seen", agent="x")
