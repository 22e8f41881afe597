"""Input validation helpers.

Small checks shared by the estimators, the engine, and the CLI. They
normalize inputs to float64 numpy arrays and raise the package's own
exception types instead of bare numpy errors.
"""

import numpy as np

from .exceptions import DimensionMismatch, NonFiniteEntry

__all__ = ["as_matrix", "as_vector", "check_finite", "check_same_length"]


def as_matrix(a, name="matrix"):
    """Coerce to a 2-D float64 array."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    return a


def as_vector(a, name="vector"):
    """Coerce to a 1-D float64 array."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {a.shape}")
    return a


def check_finite(a):
    """Raise :class:`NonFiniteEntry` locating the first bad value."""
    if np.isfinite(a).all():
        return
    a = np.atleast_2d(a)
    bad = np.argwhere(~np.isfinite(a))
    row, col = (int(v) for v in bad[0])
    raise NonFiniteEntry(row, col)


def check_same_length(u, v, what="vectors"):
    if len(u) != len(v):
        raise DimensionMismatch(f"{what} differ in length: {len(u)} vs {len(v)}")
