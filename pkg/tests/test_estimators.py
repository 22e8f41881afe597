import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from decolearn.estimators import CoLARegressor, CollocatedRegressor
from decolearn.preprocess import ColumnNormalizer


def make_data(seed=0, m=40, n=5, mean=10.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(mean, 2.0, (m, n))
    w = rng.normal(size=n)
    y = X @ w + rng.normal(0.0, 0.05, m)
    return X, y


def test_get_set_params_round_trip():
    est = CoLARegressor(lam=0.5, eta=0.25, max_rounds=17)
    params = est.get_params()
    assert params["lam"] == 0.5
    assert params["eta"] == 0.25
    twin = CoLARegressor().set_params(**params)
    assert twin.get_params() == params
    assert clone(est).get_params() == params


def test_cola_regressor_fit_predict():
    # centered features keep the ring run well conditioned without the
    # normalize step
    X, y = make_data(mean=0.0)
    est = CoLARegressor(lam=1e-4, eta=0.5, normalize=False, max_rounds=300)
    est.fit(X, y)
    assert est.coef_.shape == (5,)
    assert est.n_rounds_ == 300
    assert est.stop_reason_ == "fixed"
    assert est.comm_vectors_ == 300 * 2 * 5
    pred = est.predict(X)
    assert pred.shape == (40,)
    # ring run on well-conditioned data fits the training targets closely
    assert est.score(X, y) > 0.99


def test_cola_regressor_normalize_path():
    X, y = make_data(seed=3)
    est = CoLARegressor(lam=1e-3, eta=0.5, normalize=True, max_rounds=200)
    est.fit(X, y)
    assert est.stats_ is not None
    manual = ColumnNormalizer().fit(X)
    assert np.allclose(est.predict(X), (manual.transform(X)) @ est.coef_)


def test_cola_regressor_update_magnitude_stopping():
    X, y = make_data(seed=5)
    est = CoLARegressor(
        lam=1e-3, eta=0.5, normalize=False, max_rounds=5000, tol=1e-3, patience=2
    )
    est.fit(X, y)
    assert est.stop_reason_ == "update_magnitude"
    assert est.n_rounds_ < 5000


def test_cola_regressor_deterministic():
    X, y = make_data(seed=7)
    a = CoLARegressor(max_rounds=50).fit(X, y)
    b = CoLARegressor(max_rounds=50).fit(X, y)
    assert np.array_equal(a.coef_, b.coef_)


def test_cola_regressor_not_fitted():
    with pytest.raises(NotFittedError):
        CoLARegressor().predict(np.ones((2, 5)))


def test_cola_regressor_block_partition():
    X, y = make_data(seed=15, n=7, mean=0.0)
    est = CoLARegressor(
        lam=1e-3,
        eta=0.5,
        partition="blocks",
        n_nodes=3,
        normalize=False,
        max_rounds=100,
    )
    est.fit(X, y)
    assert est.trace_.n_nodes == 3
    assert est.comm_vectors_ == 100 * 2 * 3  # ring of 3, two neighbors each


def test_collocated_regressor_matches_normal_equations():
    X, y = make_data(seed=9)
    est = CollocatedRegressor(lam=0.0, eta=0.0, tol=1e-13, max_sweeps=50000)
    est.fit(X, y)
    oracle = np.linalg.solve(X.T @ X, X.T @ y)
    assert np.abs(est.coef_ - oracle).max() <= 1e-8
    assert est.converged_


def test_collocated_regressor_in_pipeline():
    X, y = make_data(seed=11)
    pipe = Pipeline(
        [("normalize", ColumnNormalizer()), ("model", CollocatedRegressor(lam=1e-6))]
    )
    pipe.fit(X, y)
    pred = pipe.predict(X)
    assert pred.shape == y.shape


def test_collocated_regressor_not_fitted():
    with pytest.raises(NotFittedError):
        CollocatedRegressor().predict(np.ones((2, 2)))


def test_estimators_share_objective():
    # identical elastic-net objective: long decentralized run lands on
    # the collocated coefficients
    X, y = make_data(seed=13, m=30, n=4, mean=0.0)
    ring = CoLARegressor(
        lam=1e-2, eta=0.5, normalize=False, max_rounds=1500, topology="complete"
    ).fit(X, y)
    central = CollocatedRegressor(lam=1e-2, eta=0.5, tol=1e-13, max_sweeps=50000).fit(X, y)
    assert np.abs(ring.coef_ - central.coef_).max() <= 1e-6
