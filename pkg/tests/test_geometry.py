import numpy as np
import pytest

from ippd.geometry import polyline_length, resample_polyline, segment_headings
from ippd.proposer import wrap_angle


def test_polyline_length():
    p = np.array([[0.0, 0.0], [3.0, 4.0], [3.0, 10.0]])
    assert polyline_length(p) == pytest.approx(11.0)


def test_resample_spacing():
    p = np.array([[0.0, 0.0], [10.0, 0.0]])
    out = resample_polyline(p, 1.0)
    gaps = np.linalg.norm(np.diff(out, axis=0), axis=1)
    assert np.all(gaps <= 1.0 + 1e-9)
    assert np.allclose(out[0], p[0]) and np.allclose(out[-1], p[-1])


def test_resample_preserves_corners_path():
    p = np.array([[0.0, 0.0], [5.0, 0.0], [5.0, 5.0]])
    out = resample_polyline(p, 0.5)
    # every resampled point lies on the original polyline
    on_a = (np.abs(out[:, 1]) < 1e-9) & (out[:, 0] <= 5.0 + 1e-9)
    on_b = (np.abs(out[:, 0] - 5.0) < 1e-9) & (out[:, 1] >= -1e-9)
    assert np.all(on_a | on_b)


def test_segment_headings_cardinal():
    p = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    h = segment_headings(p)
    assert h[0] == pytest.approx(0.0)
    assert h[1] == pytest.approx(np.pi / 2)


def test_wrap_angle_range():
    for a in (-7.0, -np.pi, 0.0, np.pi, 9.0):
        w = wrap_angle(a)
        assert -np.pi < w <= np.pi or w == pytest.approx(-np.pi)
        assert np.cos(w) == pytest.approx(np.cos(a))
        assert np.sin(w) == pytest.approx(np.sin(a))
