"""Prediction, metrics, communication accounting, and the collocated baseline."""

import csv
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, EmptyDataset, IoFailure, TopologyTooSmall
from .objectives import soft_threshold
from .preprocess import apply_stats
from .validation import as_matrix, as_vector, check_same_length

__all__ = [
    "RunTrace",
    "RegressionMetrics",
    "CollocatedFit",
    "predict",
    "regression_metrics",
    "comm_cost",
    "break_even_iterations",
    "collocated_solve",
    "detect_overvoltage",
    "gamma_sum_check",
    "write_trace_csv",
]

GAMMA_BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class RunTrace:
    """Per-round telemetry of one training run.

    Arrays are aligned by round: ``rounds`` (1-based, strictly
    increasing), global objective, loss f(Ax), the summed node surrogate
    values at the computed updates, the per-node update norms (rounds x K),
    and the cumulative count of column vectors transmitted.
    """

    rounds: np.ndarray
    objective: np.ndarray
    loss: np.ndarray
    gamma_sum: np.ndarray
    dx_norms: np.ndarray
    comm_cumulative: np.ndarray

    @property
    def n_rounds(self):
        return len(self.rounds)

    @property
    def n_nodes(self):
        return self.dx_norms.shape[1]

    def max_dx_norm(self):
        """Largest node update norm per round."""
        return self.dx_norms.max(axis=1)


@dataclass(frozen=True)
class RegressionMetrics:
    """Prediction error summary, all in volts."""

    rmse: float
    max_abs_error: float
    mean_error: float
    count: int

    def as_dict(self, prefix=""):
        return {
            f"{prefix}rmse": self.rmse,
            f"{prefix}max_abs_error": self.max_abs_error,
            f"{prefix}mean_error": self.mean_error,
            f"{prefix}count": self.count,
        }


def predict(x, features, stats=None):
    """Model output for ``features``; applies ``stats`` first when the
    model was trained on normalized data."""
    x = as_vector(x, "coefficients")
    features = as_matrix(features, "features")
    if stats is not None:
        features = apply_stats(features, stats)
    if features.shape[1] != len(x):
        raise DimensionMismatch(
            f"{features.shape[1]} feature columns vs {len(x)} coefficients"
        )
    return features @ x


def regression_metrics(predicted, actual):
    predicted = as_vector(predicted, "predicted")
    actual = as_vector(actual, "actual")
    check_same_length(predicted, actual, "predicted/actual")
    if len(actual) == 0:
        raise EmptyDataset("cannot compute metrics on empty vectors")
    err = predicted - actual
    return RegressionMetrics(
        rmse=float(np.sqrt(np.mean(err * err))),
        max_abs_error=float(np.max(np.abs(err))),
        mean_error=float(np.mean(err)),
        count=len(actual),
    )


def comm_cost(kind, n_nodes, iterations=0):
    """Column vectors transmitted.

    ``ring``: each node sends its estimate to both neighbors every
    iteration, 2n per iteration. ``broadcast``: one-time full data
    sharing, n(n-1) total, independent of the iteration count.
    """
    if n_nodes < 1:
        raise DimensionMismatch(f"node count must be >= 1, got {n_nodes}")
    if iterations < 0:
        raise DimensionMismatch(f"iterations must be >= 0, got {iterations}")
    if kind == "ring":
        return 2 * n_nodes * iterations
    if kind == "broadcast":
        return n_nodes * (n_nodes - 1)
    raise DimensionMismatch(f"unknown communication kind {kind!r}")


def break_even_iterations(n_nodes):
    """Largest ring iteration count still cheaper than a full broadcast:
    floor((n - 1) / 2)."""
    if n_nodes < 3:
        raise TopologyTooSmall(f"break-even needs >= 3 nodes, got {n_nodes}")
    return (n_nodes - 1) // 2


@dataclass(frozen=True)
class CollocatedFit:
    """Result of the centralized coordinate-descent solve."""

    x: np.ndarray
    n_sweeps: int
    converged: bool


def collocated_solve(features, target, lam, eta, tol=1e-10, max_sweeps=10000):
    """Cyclic coordinate descent on the centralized objective
    0.5 ||A x - b||^2 + g(x).

    Sweeps until the largest coordinate change drops below ``tol``;
    when ``max_sweeps`` is exhausted first the last iterate is returned
    with ``converged=False``. Serves as the single-site comparison model
    for the decentralized runs.
    """
    a = as_matrix(features, "features")
    b = as_vector(target, "target")
    if a.shape[0] != len(b):
        raise DimensionMismatch(f"{a.shape[0]} rows vs target length {len(b)}")
    m, n = a.shape
    sqnorms = np.einsum("ij,ij->j", a, a)
    threshold = lam * (1.0 - eta)
    curvature = lam * eta
    x = np.zeros(n)
    residual = -b.copy()  # A x - b at x = 0
    sweeps_done = max_sweeps
    converged = False
    for sweep in range(max_sweeps):
        biggest = 0.0
        for j in range(n):
            col = a[:, j]
            rho = sqnorms[j] * x[j] - float(col @ residual)
            u_new = soft_threshold(rho, threshold) / (sqnorms[j] + curvature)
            delta = u_new - x[j]
            if delta != 0.0:
                residual += col * delta
                x[j] = u_new
                biggest = max(biggest, abs(delta))
        if biggest < tol:
            sweeps_done = sweep + 1
            converged = True
            break
    return CollocatedFit(x=x, n_sweeps=sweeps_done, converged=converged)


def detect_overvoltage(voltages, nominal, threshold_fraction=0.05):
    """Maximal runs of samples strictly above nominal * (1 + fraction).

    Returns inclusive 0-based ``(start, end)`` index pairs, sorted and
    disjoint.
    """
    if nominal <= 0:
        raise DimensionMismatch(f"nominal voltage must be > 0, got {nominal}")
    voltages = as_vector(voltages, "voltages")
    cutoff = nominal * (1.0 + threshold_fraction)
    over = voltages > cutoff
    ranges = []
    start = None
    for i, flag in enumerate(over):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            ranges.append((start, i - 1))
            start = None
    if start is not None:
        ranges.append((start, len(over) - 1))
    return ranges


def gamma_sum_check(trace):
    """Per-round flags: does the summed node surrogate bound the global
    objective after the update (within a small relative slack)?"""
    slack = GAMMA_BOUND_SLACK * (1.0 + np.abs(trace.objective))
    return trace.gamma_sum >= trace.objective - slack


def write_trace_csv(trace, path):
    """Write the trace in the fixed column order
    round,objective,loss,gamma_sum,dx_norm_1..K,comm_cumulative."""
    k = trace.n_nodes
    header = (
        ["round", "objective", "loss", "gamma_sum"]
        + [f"dx_norm_{i + 1}" for i in range(k)]
        + ["comm_cumulative"]
    )
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i in range(trace.n_rounds):
                row = [int(trace.rounds[i])]
                row += [
                    format(v, ".17g")
                    for v in (
                        trace.objective[i],
                        trace.loss[i],
                        trace.gamma_sum[i],
                        *trace.dx_norms[i],
                    )
                ]
                row.append(int(trace.comm_cumulative[i]))
                writer.writerow(row)
    except OSError as exc:
        raise IoFailure(f"cannot write trace to {path}: {exc}") from exc
