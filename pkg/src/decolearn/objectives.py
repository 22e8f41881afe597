"""Loss functions and separable regularizers defining the training problem.

The global objective is ``f(A x) + g(x)`` with a smooth convex loss f and
an additively separable regularizer g. Least squares (the only loss
shipped) is (1/tau)-smooth with tau = 1; the elastic net covers the whole
regularizer family used here, including g = 0 via lambda = 0.
"""

import numpy as np

from .exceptions import ConfigError, DimensionMismatch
from .validation import as_vector

__all__ = [
    "SmoothLoss",
    "LeastSquaresLoss",
    "ElasticNetRegularizer",
    "soft_threshold",
    "loss_value",
    "loss_gradient",
    "reg_value",
    "global_objective",
]


class SmoothLoss:
    """Interface for a convex, (1/tau)-smooth loss of v = A x."""

    tau = 1.0

    def value(self, v):
        raise NotImplementedError

    def gradient(self, v):
        raise NotImplementedError


class LeastSquaresLoss(SmoothLoss):
    """f(v) = 0.5 * ||v - b||^2; gradient v - b; tau = 1."""

    def __init__(self, b):
        self.b = as_vector(b, "target")
        self.tau = 1.0

    def _check(self, v):
        v = as_vector(v, "v")
        if len(v) != len(self.b):
            raise DimensionMismatch(f"v has length {len(v)}, target {len(self.b)}")
        return v

    def value(self, v):
        r = self._check(v) - self.b
        return 0.5 * float(r @ r)

    def gradient(self, v):
        return self._check(v) - self.b


class ElasticNetRegularizer:
    """g(x) = lam * [ (eta/2) * ||x||^2 + (1 - eta) * ||x||_1 ].

    eta = 0 gives the pure L1 (Lasso) penalty, eta = 1 pure ridge, and
    lam = 0 the zero regularizer. Separable: g(x) = sum_j g_j(x_j).
    """

    def __init__(self, lam, eta):
        if lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {lam}")
        if not 0.0 <= eta <= 1.0:
            raise ConfigError(f"eta must lie in [0, 1], got {eta}")
        self.lam = float(lam)
        self.eta = float(eta)

    @property
    def l1_threshold(self):
        """Soft-threshold level lam * (1 - eta) of the separable L1 part."""
        return self.lam * (1.0 - self.eta)

    @property
    def l2_curvature(self):
        """Quadratic curvature lam * eta added to each coordinate."""
        return self.lam * self.eta

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.lam * (
            0.5 * self.eta * float(x.ravel() @ x.ravel())
            + (1.0 - self.eta) * float(np.abs(x).sum())
        )

    def coordinate_value(self, u):
        """g_j(u) for a single coordinate."""
        return self.lam * (0.5 * self.eta * u * u + (1.0 - self.eta) * abs(u))


def soft_threshold(z, theta):
    """Shrink z toward zero by theta: sign(z) * max(|z| - theta, 0)."""
    if theta < 0:
        raise ConfigError(f"threshold must be >= 0, got {theta}")
    return float(np.sign(z) * max(abs(z) - theta, 0.0))


def loss_value(loss, v):
    return loss.value(v)


def loss_gradient(loss, v):
    return loss.gradient(v)


def reg_value(reg, x):
    return reg.value(x)


def global_objective(loss, reg, features, x):
    """O_A(x) = f(A x) + g(x); telemetry only, uses the global matrix."""
    x = as_vector(x, "x")
    if features.shape[1] != len(x):
        raise DimensionMismatch(
            f"{features.shape[1]} feature columns vs {len(x)} coefficients"
        )
    return loss.value(features @ x) + reg.value(x)
