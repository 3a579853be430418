import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from percov.lp import FEAS_TOL, LinearProgram, LpError, solve_lp


def vertex_enumeration_optimum(lp: LinearProgram) -> tuple[str, float | None]:
    """Naive oracle: enumerate all basic points of the constraint system.

    Collects every row of (a_eq, a_ub, active bounds) as a hyperplane,
    solves each n-subset, keeps feasible points, and returns the best
    objective.  Only sensible for a handful of variables.
    """
    n = lp.n_vars
    planes: list[tuple[np.ndarray, float]] = []
    for i in range(lp.a_eq.shape[0]):
        planes.append((lp.a_eq[i], lp.b_eq[i]))
    for i in range(lp.a_ub.shape[0]):
        planes.append((lp.a_ub[i], lp.b_ub[i]))
    for k, (lo, hi) in enumerate(lp.bounds):
        e = np.zeros(n)
        e[k] = 1.0
        if lo is not None:
            planes.append((e, lo))
        if hi is not None:
            planes.append((e, hi))

    def feasible(x: np.ndarray) -> bool:
        if lp.a_eq.shape[0] and np.max(np.abs(lp.a_eq @ x - lp.b_eq)) > 1e-7:
            return False
        if lp.a_ub.shape[0] and np.max(lp.a_ub @ x - lp.b_ub) > 1e-7:
            return False
        for k, (lo, hi) in enumerate(lp.bounds):
            if lo is not None and x[k] < lo - 1e-7:
                return False
            if hi is not None and x[k] > hi + 1e-7:
                return False
        return True

    best = None
    for combo in itertools.combinations(range(len(planes)), n):
        a = np.array([planes[i][0] for i in combo])
        b = np.array([planes[i][1] for i in combo])
        if abs(np.linalg.det(a)) < 1e-10:
            continue
        x = np.linalg.solve(a, b)
        if feasible(x):
            val = float(lp.c @ x) + lp.objective_const
            if best is None or val < best:
                best = val
    if best is None:
        return "infeasible", None
    return "optimal", best


def random_bounded_lp(rng: np.random.Generator, n: int, m_eq: int, m_ub: int):
    """Random program kept feasible by construction around a known point."""
    x0 = rng.uniform(0.2, 1.0, size=n)
    a_eq = rng.normal(size=(m_eq, n))
    b_eq = a_eq @ x0
    a_ub = rng.normal(size=(m_ub, n))
    b_ub = a_ub @ x0 + rng.uniform(0.05, 1.0, size=m_ub)
    c = rng.normal(size=n)
    bounds = [(0.0, 3.0)] * n
    return LinearProgram.build(c, a_eq, b_eq, a_ub, b_ub, bounds)


def test_trivial_one_variable():
    lp = LinearProgram.build(c=[1.0], a_eq=[[1.0]], b_eq=[2.0], bounds=[(0.0, 5.0)])
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(2.0, abs=1e-12)


def test_infeasible_detected():
    lp = LinearProgram.build(
        c=[0.0, 0.0],
        a_eq=[[1.0, 1.0]],
        b_eq=[5.0],
        bounds=[(0.0, 1.0), (0.0, 1.0)],
    )
    assert solve_lp(lp).status == "infeasible"


def test_unbounded_detected():
    lp = LinearProgram.build(c=[-1.0], bounds=[(0.0, None)])
    assert solve_lp(lp).status == "unbounded"


def test_free_variable_handling():
    # min x subject to x >= -4 expressed through an inequality row only
    lp = LinearProgram.build(
        c=[1.0], a_ub=[[-1.0]], b_ub=[4.0], bounds=[(None, None)]
    )
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(-4.0, abs=1e-9)


def test_degenerate_program_terminates():
    # many redundant rows through the same vertex; Bland must not cycle
    lp = LinearProgram.build(
        c=[-0.75, 150.0, -0.02, 6.0],
        a_ub=[
            [0.25, -60.0, -0.04, 9.0],
            [0.5, -90.0, -0.02, 3.0],
            [0.0, 0.0, 1.0, 0.0],
        ],
        b_ub=[0.0, 0.0, 1.0],
        bounds=[(0.0, None)] * 4,
    )
    sol = solve_lp(lp)  # Beale's cycling example
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(-0.05, abs=1e-9)


def test_matches_vertex_enumeration_small():
    rng = np.random.default_rng(42)
    checked = 0
    for trial in range(60):
        n = int(rng.integers(2, 5))
        lp = random_bounded_lp(rng, n, m_eq=int(rng.integers(0, 2)), m_ub=3)
        sol = solve_lp(lp)
        status, best = vertex_enumeration_optimum(lp)
        assert sol.status == status
        if status == "optimal":
            assert sol.objective == pytest.approx(best, abs=1e-6)
            checked += 1
    assert checked >= 40


def test_matches_scipy_on_10x20():
    rng = np.random.default_rng(3)
    for trial in range(30):
        lp = random_bounded_lp(rng, n=20, m_eq=4, m_ub=6)
        sol = solve_lp(lp)
        ref = linprog(
            lp.c,
            A_eq=lp.a_eq,
            b_eq=lp.b_eq,
            A_ub=lp.a_ub,
            b_ub=lp.b_ub,
            bounds=lp.bounds,
            method="highs",
        )
        assert sol.status == "optimal" and ref.status == 0
        assert sol.objective == pytest.approx(ref.fun, abs=1e-6)


def test_returned_point_feasible_and_duals_complementary():
    rng = np.random.default_rng(11)
    for trial in range(40):
        n = int(rng.integers(2, 8))
        lp = random_bounded_lp(rng, n, m_eq=int(rng.integers(0, 3)), m_ub=4)
        sol = solve_lp(lp)
        if sol.status != "optimal":
            continue
        x = sol.x
        if lp.a_eq.shape[0]:
            assert np.max(np.abs(lp.a_eq @ x - lp.b_eq)) <= FEAS_TOL
        slack = lp.b_ub - lp.a_ub @ x
        assert slack.min() >= -FEAS_TOL
        if sol.duals_ub is None:
            continue
        assert sol.duals_ub.min() >= -1e-6
        # complementary slackness on every inequality row
        assert np.max(np.abs(sol.duals_ub * slack)) <= 1e-6
        # stationarity on coordinates strictly inside their bounds
        grad = lp.c.copy()
        if lp.a_eq.shape[0] and sol.duals_eq is not None:
            grad += lp.a_eq.T @ sol.duals_eq
        grad += lp.a_ub.T @ sol.duals_ub
        for k, (lo, hi) in enumerate(lp.bounds):
            if x[k] > lo + 1e-6 and x[k] < hi - 1e-6:
                assert abs(grad[k]) <= 1e-6


def test_dimension_mismatch_raises():
    with pytest.raises(LpError):
        LinearProgram.build(c=[1.0, 2.0], a_eq=[[1.0, 1.0]], b_eq=[1.0, 2.0])


def test_empty_program_only_bounds():
    lp = LinearProgram.build(c=[2.0, -1.0], bounds=[(1.0, 4.0), (0.0, 3.0)])
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(1.0)
    assert sol.x[1] == pytest.approx(3.0)
