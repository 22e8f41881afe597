"""Scikit-learn estimators wrapping the decentralized and collocated solvers.

Both regressors follow the standard fit/predict contract and work inside
sklearn pipelines, cross-validation, and grid search via
``get_params`` / ``set_params``.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .engine import run
from .evaluate import collocated_solve, predict
from .model import ColumnDataset, ExperimentConfig, StoppingRule
from .preprocess import preprocess_matrix
from .validation import as_matrix, as_vector

__all__ = ["CoLARegressor", "CollocatedRegressor"]


class CoLARegressor(BaseEstimator, RegressorMixin):
    """Linear regression trained by simulated decentralized nodes.

    Each node owns a block of feature columns, averages its running
    estimate with its topology neighbors every round, and updates its own
    coefficients by solving a local surrogate problem. ``fit`` runs the
    whole multi-node simulation in process.

    Parameters mirror the experiment configuration: elastic-net strength
    ``lam`` and mix ``eta`` (eta=0 pure L1, eta=1 pure ridge),
    ``topology`` ("ring", "complete", or "file:PATH"), ``partition``
    ("per-column" or "blocks" with ``n_nodes``), the built-in column
    ``normalize`` step, the round ``scheduler``, and the stopping rule
    (fixed ``max_rounds`` when ``tol`` is None, otherwise update-magnitude
    with ``tol``/``patience`` and ``max_rounds`` as cap).
    """

    def __init__(
        self,
        lam=1e-3,
        eta=0.5,
        topology="ring",
        partition="per-column",
        n_nodes=None,
        normalize=True,
        scheduler="synchronous",
        max_rounds=500,
        tol=None,
        patience=5,
        random_state=0,
    ):
        self.lam = lam
        self.eta = eta
        self.topology = topology
        self.partition = partition
        self.n_nodes = n_nodes
        self.normalize = normalize
        self.scheduler = scheduler
        self.max_rounds = max_rounds
        self.tol = tol
        self.patience = patience
        self.random_state = random_state

    def _config(self):
        if self.tol is None:
            stopping = StoppingRule.fixed(self.max_rounds)
        else:
            stopping = StoppingRule.update_magnitude(
                epsilon=self.tol, patience=self.patience, cap=self.max_rounds
            )
        return ExperimentConfig(
            lam=self.lam,
            eta=self.eta,
            partition=self.partition,
            n_nodes=self.n_nodes,
            topology=self.topology,
            preprocess=self.normalize,
            scheduler=self.scheduler,
            stopping=stopping,
            seed=self.random_state,
        )

    def fit(self, X, y):
        X = as_matrix(X, "X")
        y = as_vector(y, "y")
        dataset = ColumnDataset(features=X, target=y)
        self.stats_ = None
        if self.normalize:
            dataset, self.stats_ = preprocess_matrix(dataset)
        result = run(self._config(), dataset)
        self.coef_ = result.x
        self.trace_ = result.trace
        self.stop_reason_ = result.stop_reason
        self.n_rounds_ = result.n_rounds
        self.comm_vectors_ = int(result.trace.comm_cumulative[-1])
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise NotFittedError("CoLARegressor is not fitted yet")
        return predict(self.coef_, X, self.stats_)


class CollocatedRegressor(BaseEstimator, RegressorMixin):
    """Centralized elastic-net regression by cyclic coordinate descent.

    The single-site comparison model: identical objective to
    :class:`CoLARegressor` but trained with all columns in one place.
    Does not normalize; compose with
    :class:`~decolearn.preprocess.ColumnNormalizer` in a pipeline when
    normalized features are wanted.
    """

    def __init__(self, lam=0.0, eta=0.0, tol=1e-10, max_sweeps=10000):
        self.lam = lam
        self.eta = eta
        self.tol = tol
        self.max_sweeps = max_sweeps

    def fit(self, X, y):
        X = as_matrix(X, "X")
        y = as_vector(y, "y")
        check_finite(X)
        check_finite(y)
        fit_result = collocated_solve(
            X, y, self.lam, self.eta, tol=self.tol, max_sweeps=self.max_sweeps
        )
        self.coef_ = fit_result.x
        self.n_sweeps_ = fit_result.n_sweeps
        self.converged_ = fit_result.converged
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise NotFittedError("CollocatedRegressor is not fitted yet")
        X = as_matrix(X, "X")
        return X @ np.asarray(self.coef_)
