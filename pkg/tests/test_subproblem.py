import numpy as np
import pytest

from decolearn.exceptions import DegenerateColumn, DimensionMismatch
from decolearn.subproblem import (
    LocalProblem,
    gamma_value,
    solve_block,
    solve_single_coordinate,
)


def make_problem(a, grad, f_at_v, x, k=1, tau=1.0, lam=0.0, eta=0.0):
    return LocalProblem(
        a_block=np.atleast_2d(np.asarray(a, dtype=float).T).T
        if np.asarray(a).ndim == 1
        else np.asarray(a, dtype=float),
        grad_at_v=grad,
        f_at_v=f_at_v,
        x_block=x,
        n_nodes=k,
        tau=tau,
        lam=lam,
        eta=eta,
    )


def brute_gamma(problem, dx):
    """Term-by-term re-evaluation with plain numpy expressions."""
    dx = np.asarray(dx, dtype=float)
    a_dx = problem.a_block @ dx
    lam, eta = problem.lam, problem.eta
    penalty = sum(
        lam * (0.5 * eta * u * u + (1 - eta) * abs(u))
        for u in problem.x_block + dx
    )
    return (
        problem.f_at_v / problem.n_nodes
        + float(np.dot(problem.grad_at_v, a_dx))
        + problem.n_nodes / (2 * problem.tau) * float(np.dot(a_dx, a_dx))
        + penalty
    )


def coordinate_objective(p_dot, q, x_cur, lam, eta, delta):
    u = x_cur + delta
    return p_dot * delta + 0.5 * q * delta**2 + lam * (
        0.5 * eta * u**2 + (1 - eta) * abs(u)
    )


def test_gamma_at_zero_update():
    # quadratic and linear terms vanish; only (1/K) f and the penalty remain
    prob = make_problem(
        np.array([[1.0, 0.0], [0.0, 1.0]]),
        grad=[1.0, -1.0],
        f_at_v=6.0,
        x=[2.0, -1.0],
        k=3,
        lam=1.0,
        eta=0.0,
    )
    assert gamma_value(prob, [0.0, 0.0]) == pytest.approx(6.0 / 3 + 3.0, abs=1e-15)


def test_gamma_worked_single_column_example():
    # K=1, tau=1, lam=0, column (1,0), v=0, b=(2,0), x=0, dx=1:
    # f(0)=2, linear term -2, quadratic 0.5 -> total 0.5
    prob = make_problem(
        np.array([[1.0], [0.0]]), grad=[-2.0, 0.0], f_at_v=2.0, x=[0.0], k=1
    )
    assert gamma_value(prob, [1.0]) == pytest.approx(0.5, abs=1e-15)


def test_gamma_matches_brute_force():
    rng = np.random.default_rng(1)
    for _ in range(30):
        m, d = int(rng.integers(2, 8)), int(rng.integers(1, 4))
        prob = make_problem(
            rng.normal(size=(m, d)),
            grad=rng.normal(size=m),
            f_at_v=float(rng.uniform(0, 5)),
            x=rng.normal(size=d),
            k=int(rng.integers(1, 6)),
            tau=float(rng.uniform(0.5, 2.0)),
            lam=float(rng.uniform(0, 2)),
            eta=float(rng.uniform(0, 1)),
        )
        dx = rng.normal(size=d)
        assert gamma_value(prob, dx) == pytest.approx(brute_gamma(prob, dx), abs=1e-12)


def test_gamma_dimension_mismatch():
    prob = make_problem(np.ones((3, 2)), grad=np.ones(3), f_at_v=0.0, x=np.zeros(2))
    with pytest.raises(DimensionMismatch):
        gamma_value(prob, [1.0])


def grid_minimum(p_dot, q, x_cur, lam, eta, lo=-10.0, hi=10.0, step=1e-4):
    deltas = np.arange(lo, hi + step, step)
    u = x_cur + deltas
    values = (
        p_dot * deltas
        + 0.5 * q * deltas**2
        + lam * (0.5 * eta * u**2 + (1 - eta) * np.abs(u))
    )
    return float(values.min())


def test_single_coordinate_examples():
    assert solve_single_coordinate(0.0, 2.0, 0.0, 0.0, 0.0) == 0.0
    assert solve_single_coordinate(-2.0, 2.0, 0.0, 0.0, 0.0) == 1.0
    assert solve_single_coordinate(-3.0, 1.0, 0.0, 1.0, 0.0) == 2.0
    assert solve_single_coordinate(-3.0, 1.0, 0.0, 1.0, 0.5) == pytest.approx(
        5.0 / 3.0, abs=1e-15
    )


def test_single_coordinate_examples_beat_grid():
    for p_dot, q, lam, eta in [(-2.0, 2.0, 0.0, 0.0), (-3.0, 1.0, 1.0, 0.0),
                               (-3.0, 1.0, 1.0, 0.5)]:
        delta = solve_single_coordinate(p_dot, q, 0.0, lam, eta)
        ours = coordinate_objective(p_dot, q, 0.0, lam, eta, delta)
        assert grid_minimum(p_dot, q, 0.0, lam, eta) >= ours - 1e-6


def test_single_coordinate_subgradient_optimality():
    rng = np.random.default_rng(3)
    for _ in range(200):
        p_dot = float(rng.uniform(-3, 3))
        q = float(rng.uniform(0.5, 3))
        x_cur = float(rng.uniform(-1, 1))
        lam = float(rng.uniform(0, 2))
        eta = float(rng.uniform(0, 1))
        delta = solve_single_coordinate(p_dot, q, x_cur, lam, eta)
        u = x_cur + delta
        smooth = q * delta + p_dot + lam * eta * u
        if u != 0.0:
            residual = smooth + lam * (1 - eta) * np.sign(u)
            assert abs(residual) <= 1e-9
        else:
            # some subgradient s in [-1, 1] must cancel the smooth part
            assert abs(smooth) <= lam * (1 - eta) + 1e-9


def test_single_coordinate_lam_zero_closed_form():
    rng = np.random.default_rng(8)
    for _ in range(50):
        p_dot = float(rng.uniform(-4, 4))
        q = float(rng.uniform(0.1, 5))
        x_cur = float(rng.uniform(-2, 2))
        delta = solve_single_coordinate(p_dot, q, x_cur, 0.0, 0.0)
        assert delta == pytest.approx(-p_dot / q, rel=1e-12, abs=1e-12)


def test_single_coordinate_degenerate_q():
    with pytest.raises(DegenerateColumn):
        solve_single_coordinate(1.0, 0.0, 0.0, 0.0, 0.0)


def test_solve_block_single_column_equals_closed_form():
    # column with squared norm 2 and gradient inner product -2: the
    # closed form gives exactly one
    a = np.array([[1.0], [1.0]])
    grad = np.array([-1.0, -1.0])
    prob = make_problem(a, grad=grad, f_at_v=2.0, x=[0.0], k=1)
    dx = solve_block(prob)
    expected = solve_single_coordinate(
        float(grad @ a[:, 0]), float(a[:, 0] @ a[:, 0]), 0.0, 0.0, 0.0
    )
    assert dx[0] == expected == 1.0


def test_solve_block_orthogonal_columns_least_squares():
    # lam=0, K=1: block step solves the local normal equations
    a = np.array([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]])
    b = np.array([3.0, 4.0, 5.0])
    grad = -b  # gradient of 0.5||v-b||^2 at v=0
    prob = make_problem(a, grad=grad, f_at_v=0.5 * b @ b, x=[0.0, 0.0], k=1)
    dx = solve_block(prob, tol=1e-12)
    oracle, *_ = np.linalg.lstsq(a, b, rcond=None)
    assert np.allclose(dx, oracle, atol=1e-10)


def test_solve_block_general_block_matches_normal_equations():
    rng = np.random.default_rng(5)
    for _ in range(10):
        a = rng.normal(size=(12, 3))
        b = rng.normal(size=12)
        prob = make_problem(a, grad=-b, f_at_v=0.5 * b @ b, x=np.zeros(3), k=1)
        dx = solve_block(prob, tol=1e-14, max_sweeps=500)
        oracle = np.linalg.solve(a.T @ a, a.T @ b)
        assert np.allclose(dx, oracle, atol=1e-10)


def test_solve_block_stationary_returns_zero():
    rng = np.random.default_rng(6)
    a = rng.normal(size=(10, 2))
    x_star = np.array([1.5, -0.75])
    # gradient orthogonal to the columns: residual of the exact solve
    b = a @ x_star
    prob = make_problem(a, grad=a @ x_star - b, f_at_v=0.0, x=x_star, k=1)
    dx = solve_block(prob)
    assert np.linalg.norm(dx) <= 1e-10


def test_solve_block_descent_property():
    rng = np.random.default_rng(7)
    for _ in range(25):
        m, d = int(rng.integers(3, 10)), int(rng.integers(1, 5))
        prob = make_problem(
            rng.normal(size=(m, d)),
            grad=rng.normal(size=m),
            f_at_v=float(rng.uniform(0, 3)),
            x=rng.normal(size=d),
            k=int(rng.integers(1, 5)),
            lam=float(rng.uniform(0, 1.5)),
            eta=float(rng.uniform(0, 1)),
        )
        dx = solve_block(prob, max_sweeps=50)
        assert gamma_value(prob, dx) <= gamma_value(prob, np.zeros(d)) + 1e-12


def test_solve_block_zero_column_degenerate():
    a = np.zeros((4, 1))
    prob = make_problem(a, grad=np.ones(4), f_at_v=1.0, x=[0.0], k=1)
    with pytest.raises(DegenerateColumn):
        solve_block(prob)
