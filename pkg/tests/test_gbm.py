import numpy as np
import pytest

from oracles import o_fit_gbm
from noreflow.errors import DimensionMismatch, NonFiniteFeature, SingleClassTraining
from noreflow.model.gbm import GbmConfig, GbmModel, fit_gbm, predict_score


def _separable(n=12):
    x = np.linspace(-1, 1, n)[:, None]
    return x, (x[:, 0] > 0).astype(int)


def test_separable_training_accuracy():
    X, y = _separable()
    model = fit_gbm(X, y)
    pred = (model.predict_score(X) >= 0.5).astype(int)
    assert np.all(pred == y)
    assert predict_score(model, np.array([0.9])) > 0.5
    assert predict_score(model, np.array([-0.9])) < 0.5


def test_single_class_rejected():
    with pytest.raises(SingleClassTraining):
        fit_gbm(np.zeros((6, 2)), np.ones(6))


def test_bad_inputs():
    X, y = _separable()
    X[0, 0] = np.nan
    with pytest.raises(NonFiniteFeature):
        fit_gbm(X, y)
    with pytest.raises(DimensionMismatch):
        fit_gbm(np.zeros((5, 2)), np.array([0, 1, 0, 1]))
    model = fit_gbm(*_separable())
    with pytest.raises(DimensionMismatch):
        model.predict_score(np.zeros(3))


def test_zero_tree_model_scores_half():
    model = GbmModel(0.0, [], ("a",), np.zeros(1), 0.9)
    assert predict_score(model, np.array([5.0])) == 0.5


def test_bit_identical_refit():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(30, 6))
    y = (X[:, 1] + rng.normal(size=30) > 0).astype(int)
    a = fit_gbm(X, y, GbmConfig(seed=7)).predict_score(X)
    b = fit_gbm(X, y, GbmConfig(seed=7)).predict_score(X)
    assert a.tobytes() == b.tobytes()


def test_scores_strictly_inside_unit_interval():
    X, y = _separable(40)
    model = fit_gbm(X * 1e6, y, GbmConfig(n_estimators=50, learning_rate=1.0, min_leaf=1))
    s = model.predict_score(X * 1e6)
    assert np.all((s > 0) & (s < 1))


def test_importances_normalized():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 4))
    y = (X[:, 2] > 0).astype(int)
    model = fit_gbm(X, y, feature_names=["a", "b", "c", "d"])
    imp = model.importance_dict()
    assert sum(imp.values()) == pytest.approx(1.0, abs=1e-12)
    assert max(imp, key=imp.get) == "c"


def test_tie_breaks_to_lowest_feature():
    # two identical columns give identical gains; the first must be used
    X, y = _separable()
    model = fit_gbm(np.hstack([X, X]), y, GbmConfig(n_estimators=1, max_depth=1))
    assert model.trees[0].feature[0] == 0


@pytest.mark.parametrize("seed", range(12))
def test_matches_bruteforce_oracle(seed):
    rng = np.random.default_rng(seed)
    n, nf = int(rng.integers(8, 30)), int(rng.integers(1, 5))
    X = rng.normal(size=(n, nf))
    if seed % 3 == 0:
        X = np.round(X)
    y = (X[:, 0] + rng.normal(size=n) > 0.2).astype(int)
    y[:2] = [0, 1]
    depth = 1 + seed % 3
    model = fit_gbm(X, y, GbmConfig(10, depth, 0.9, 2))
    oracle = o_fit_gbm(X.tolist(), y.tolist(), 10, depth, 0.9, 2)
    probe = np.vstack([X, rng.normal(size=(20, nf))])
    for row in probe:
        assert model.predict_score(row) == pytest.approx(oracle(row.tolist()), abs=1e-12)


def test_config_validation():
    for kwargs in ({"n_estimators": 0}, {"max_depth": 0}, {"learning_rate": 0.0}, {"min_leaf": 0}):
        with pytest.raises(ValueError):
            GbmConfig(**kwargs)
