import numpy as np
import pytest

from ippd.encoding import extract_path_features
from ippd.estimator import ScoreRegressor
from ippd.instruction_parser import default_parser, tokenize


def test_get_set_params_round_trip():
    est = ScoreRegressor(epochs=2, d=24, n_layers=2, n_heads=3)
    params = est.get_params()
    assert params["epochs"] == 2 and params["d"] == 24
    est2 = ScoreRegressor().set_params(**params)
    assert est2.get_params() == params


def test_clone_compatible():
    from sklearn.base import clone

    est = ScoreRegressor(epochs=1, d=24, n_layers=2, n_heads=3)
    cl = clone(est)
    assert cl.get_params() == est.get_params()


def test_fit_predict_smoke(small_map, small_grid, parser):
    nav = np.argwhere(small_grid.cells)
    toks = tokenize("walk past the sofa and stop", keep_punct=False)
    X, y = [], []
    for k, target in zip((20, 80, 160, 240), (0.9, 0.6, 0.4, 0.1)):
        a = small_grid.cell_to_world(*nav[k])
        b = small_grid.cell_to_world(*nav[-k])
        feats = extract_path_features(small_map, np.array([a, b]), start_theta=0.0)
        X.append((toks, feats))
        y.append(target)
    est = ScoreRegressor(epochs=2, d=24, n_layers=2, n_heads=3, seed=0,
                         num_threads=1)
    est.fit(X, y)
    pred = est.predict(X)
    assert pred.shape == (4,)
    assert np.isfinite(pred).all()


def test_predict_before_fit_raises():
    est = ScoreRegressor()
    with pytest.raises(Exception):
        est.predict([])
