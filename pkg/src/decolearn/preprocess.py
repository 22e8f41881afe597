"""Column-wise centering and normalization of the feature matrix.

Each column j is replaced by ``(a - mu_j) / nu_j`` where ``mu_j`` is the
column mean and ``nu_j`` the root-mean-square of the *original* column
(not the standard deviation of the centered one). The transform needs no
information from other columns, so a node holding a column block can
apply it without communicating. The target vector is never touched and
stays in volts.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .exceptions import DegenerateColumn, DimensionMismatch
from .model import ColumnDataset
from .validation import as_matrix, as_vector, check_finite

__all__ = [
    "ColumnStats",
    "column_stats",
    "preprocess_matrix",
    "apply_stats",
    "ColumnNormalizer",
]


@dataclass(frozen=True)
class ColumnStats:
    """Per-column mean and root-mean-square of the training features."""

    mu: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", as_vector(self.mu, "mu"))
        object.__setattr__(self, "nu", as_vector(self.nu, "nu"))

    @property
    def n_columns(self):
        return len(self.mu)


def column_stats(col):
    """Mean and RMS of one column; RMS uses the raw (uncentered) values."""
    col = as_vector(col, "column")
    if len(col) < 1:
        raise DimensionMismatch("column must have at least one entry")
    mu = float(col.mean())
    nu = float(np.sqrt(np.mean(col * col)))
    if nu == 0.0:
        raise DegenerateColumn(0, "all-zero column has no scale")
    return mu, nu


def preprocess_matrix(dataset):
    """Center and normalize every feature column of ``dataset``.

    Returns the transformed dataset together with the fitted
    :class:`ColumnStats` so held-out data can be mapped into the same
    feature space. Raises :class:`DegenerateColumn` (with the offending
    index) on an all-zero column.
    """
    features = dataset.features
    mu = features.mean(axis=0)
    nu = np.sqrt(np.mean(features * features, axis=0))
    zero = np.flatnonzero(nu == 0.0)
    if zero.size:
        raise DegenerateColumn(int(zero[0]))
    stats = ColumnStats(mu=mu, nu=nu)
    transformed = ColumnDataset(
        features=(features - mu) / nu,
        target=dataset.target,
        sample_period_minutes=dataset.sample_period_minutes,
        column_labels=dataset.column_labels,
    )
    return transformed, stats


def apply_stats(features, stats):
    """Apply previously fitted stats to a new feature matrix."""
    features = as_matrix(features, "features")
    if features.shape[1] != stats.n_columns:
        raise DimensionMismatch(
            f"{features.shape[1]} columns vs stats for {stats.n_columns}"
        )
    return (features - stats.mu) / stats.nu


class ColumnNormalizer(BaseEstimator, TransformerMixin):
    """Scikit-learn transformer wrapping the column normalization.

    ``fit`` learns per-column ``mu_`` and ``nu_`` from the training
    features; ``transform`` maps any conforming matrix into the learned
    feature space. Composes with :class:`sklearn.pipeline.Pipeline`.
    """

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        check_finite(X)
        mu = X.mean(axis=0)
        nu = np.sqrt(np.mean(X * X, axis=0))
        zero = np.flatnonzero(nu == 0.0)
        if zero.size:
            raise DegenerateColumn(int(zero[0]))
        self.mu_ = mu
        self.nu_ = nu
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        if not hasattr(self, "mu_"):
            raise NotFittedError("ColumnNormalizer is not fitted yet")
        return apply_stats(X, ColumnStats(mu=self.mu_, nu=self.nu_))

    def inverse_transform(self, X):
        if not hasattr(self, "mu_"):
            raise NotFittedError("ColumnNormalizer is not fitted yet")
        X = as_matrix(X, "X")
        if X.shape[1] != len(self.mu_):
            raise DimensionMismatch(
                f"{X.shape[1]} columns vs stats for {len(self.mu_)}"
            )
        return X * self.nu_ + self.mu_

    @property
    def stats_(self):
        if not hasattr(self, "mu_"):
            raise NotFittedError("ColumnNormalizer is not fitted yet")
        return ColumnStats(mu=self.mu_, nu=self.nu_)
