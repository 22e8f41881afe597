"""Node-local subproblem: evaluation and solvers.

Given the node's column block A_k, its current coefficients x_k, and the
loss gradient at its mixed local estimate, the node minimizes the
surrogate

    Gamma_k(dx) = (1/K) f(v) + <grad, A_k dx> + (K / (2 tau)) ||A_k dx||^2
                  + sum_j g_j(x_j + dx_j)

over its own coordinates only. For a single column the minimizer has a
soft-threshold closed form; blocks are solved by cyclic coordinate
descent over that closed form.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DegenerateColumn, DimensionMismatch
from .objectives import soft_threshold
from .validation import as_matrix, as_vector

__all__ = [
    "LocalProblem",
    "gamma_value",
    "solve_single_coordinate",
    "solve_block",
]


@dataclass
class LocalProblem:
    """One node's view of the current round.

    ``a_block`` is the m x d column block, ``grad_at_v`` the loss gradient
    at the node's mixed estimate, ``f_at_v`` the loss value there, and
    ``x_block`` the node's current coefficients. ``col_sqnorms`` caches
    the squared column norms; it is computed on demand when absent.
    """

    a_block: np.ndarray
    grad_at_v: np.ndarray
    f_at_v: float
    x_block: np.ndarray
    n_nodes: int
    tau: float
    lam: float
    eta: float
    col_sqnorms: np.ndarray | None = None

    def __post_init__(self):
        self.a_block = as_matrix(self.a_block, "a_block")
        self.grad_at_v = as_vector(self.grad_at_v, "grad_at_v")
        self.x_block = as_vector(self.x_block, "x_block")
        if self.a_block.shape[0] != len(self.grad_at_v):
            raise DimensionMismatch(
                f"block has {self.a_block.shape[0]} rows, "
                f"gradient {len(self.grad_at_v)}"
            )
        if self.a_block.shape[1] != len(self.x_block):
            raise DimensionMismatch(
                f"block has {self.a_block.shape[1]} columns, "
                f"coefficients {len(self.x_block)}"
            )
        if self.n_nodes < 1:
            raise ConfigError("node count must be >= 1")
        if self.tau <= 0:
            raise ConfigError("tau must be > 0")
        if self.col_sqnorms is None:
            self.col_sqnorms = np.einsum(
                "ij,ij->j", self.a_block, self.a_block
            )

    def coordinate_penalty(self, u):
        return self.lam * (0.5 * self.eta * u * u + (1.0 - self.eta) * abs(u))


def gamma_value(problem, dx):
    """Evaluate the surrogate objective at the update ``dx``."""
    dx = as_vector(dx, "dx")
    if len(dx) != problem.a_block.shape[1]:
        raise DimensionMismatch(
            f"dx has length {len(dx)}, block {problem.a_block.shape[1]} columns"
        )
    a_dx = problem.a_block @ dx
    value = problem.f_at_v / problem.n_nodes
    value += float(problem.grad_at_v @ a_dx)
    value += problem.n_nodes / (2.0 * problem.tau) * float(a_dx @ a_dx)
    new_x = problem.x_block + dx
    for u in new_x:
        value += problem.coordinate_penalty(float(u))
    return value


def solve_single_coordinate(p_dot, q, x_cur, lam, eta):
    """Exact minimizer of the surrogate restricted to one coordinate.

    ``p_dot`` is the inner product of the loss gradient with the column,
    ``q`` the curvature (K / tau) * ||a||^2. Returns the step delta such
    that the new coefficient value is

        u* = S_{lam (1 - eta)}(q * x_cur - p_dot) / (q + lam * eta),

    where S is the soft threshold. At the threshold kink the coefficient
    lands exactly on zero (standard Lasso tie-break).
    """
    if q <= 0:
        raise DegenerateColumn(0, "zero-norm column in single-coordinate solve")
    u_new = soft_threshold(q * x_cur - p_dot, lam * (1.0 - eta)) / (q + lam * eta)
    return u_new - x_cur


def solve_block(problem, tol=1e-10, max_sweeps=100):
    """Minimize the surrogate over a block by cyclic coordinate descent.

    Each inner step applies the single-coordinate closed form against the
    running residual A_k dx. Sweeps stop when the largest per-coordinate
    change falls below ``tol`` or after ``max_sweeps``. A one-column
    block is therefore solved exactly in the first sweep. The returned
    update never increases the surrogate.
    """
    a = problem.a_block
    m, d = a.shape
    sqnorms = problem.col_sqnorms
    if np.any(sqnorms == 0.0):
        raise DegenerateColumn(int(np.flatnonzero(sqnorms == 0.0)[0]))
    scale = problem.n_nodes / problem.tau
    grad = problem.grad_at_v
    dx = np.zeros(d)
    a_dx = np.zeros(m)
    for _ in range(max_sweeps):
        biggest = 0.0
        for j in range(d):
            col = a[:, j]
            p_eff = float(grad @ col) + scale * float(a_dx @ col)
            delta = solve_single_coordinate(
                p_eff,
                scale * sqnorms[j],
                problem.x_block[j] + dx[j],
                problem.lam,
                problem.eta,
            )
            if delta != 0.0:
                dx[j] += delta
                a_dx += col * delta
                biggest = max(biggest, abs(delta))
        if biggest < tol:
            break
    return dx
