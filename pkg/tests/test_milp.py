import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from percov.milp import MilpError, MilpProblem, MilpSolution, solve_milp
from percov.lp import LinearProgram


def enumerate_binaries_optimum(problem: MilpProblem) -> tuple[str, float | None]:
    """Oracle: try all 2^n binary assignments, solve each rest-LP with scipy."""
    lp = problem.lp
    best = None
    for assignment in itertools.product((0.0, 1.0), repeat=len(problem.binary_indices)):
        bounds = list(lp.bounds)
        skip = False
        for k, v in zip(problem.binary_indices, assignment):
            lo, hi = bounds[k]
            if v < lo - 1e-9 or v > hi + 1e-9:
                skip = True
                break
            bounds[k] = (v, v)
        if skip:
            continue
        ref = linprog(
            lp.c,
            A_eq=lp.a_eq if lp.a_eq.size else None,
            b_eq=lp.b_eq if lp.b_eq.size else None,
            A_ub=lp.a_ub if lp.a_ub.size else None,
            b_ub=lp.b_ub if lp.b_ub.size else None,
            bounds=bounds,
            method="highs",
        )
        if ref.status == 0:
            val = float(ref.fun) + lp.objective_const
            if best is None or val < best:
                best = val
    if best is None:
        return "infeasible", None
    return "optimal", best


def random_mixed_problem(rng: np.random.Generator, n_cont: int, n_bin: int):
    n = n_cont + n_bin
    x_cont = rng.uniform(0.1, 0.9, size=n_cont)
    x_bin = rng.integers(0, 2, size=n_bin).astype(float)
    x0 = np.concatenate([x_cont, x_bin])
    m_ub = n
    a_ub = rng.normal(size=(m_ub, n))
    b_ub = a_ub @ x0 + rng.uniform(0.05, 0.8, size=m_ub)
    c = rng.normal(size=n)
    bounds = [(0.0, 2.0)] * n_cont + [(0.0, 1.0)] * n_bin
    lp = LinearProgram.build(c, a_ub=a_ub, b_ub=b_ub, bounds=bounds)
    return MilpProblem(lp, tuple(range(n_cont, n)))


def test_pure_lp_passthrough():
    lp = LinearProgram.build(c=[1.0], a_eq=[[1.0]], b_eq=[0.5], bounds=[(0.0, 1.0)])
    sol = solve_milp(MilpProblem(lp, ()))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(0.5)


def test_simple_knapsack():
    # max 4a + 3b + 5c s.t. 2a + 3b + 4c <= 5  ->  a=b=1, c=0, value 7
    lp = LinearProgram.build(
        c=[-4.0, -3.0, -5.0],
        a_ub=[[2.0, 3.0, 4.0]],
        b_ub=[5.0],
        bounds=[(0.0, 1.0)] * 3,
    )
    sol = solve_milp(MilpProblem(lp, (0, 1, 2)))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(-7.0)
    assert np.allclose(sol.x, [1.0, 1.0, 0.0])


def test_infeasible_binary_system():
    # a + b = 0.5 has no binary solution
    lp = LinearProgram.build(
        c=[1.0, 1.0],
        a_eq=[[1.0, 1.0]],
        b_eq=[0.5],
        bounds=[(0.0, 1.0)] * 2,
    )
    sol = solve_milp(MilpProblem(lp, (0, 1)))
    assert sol.status == "infeasible"
    assert sol.x is None


def test_matches_enumeration_oracle():
    rng = np.random.default_rng(7)
    for trial in range(25):
        problem = random_mixed_problem(
            rng, n_cont=int(rng.integers(1, 4)), n_bin=int(rng.integers(2, 9))
        )
        sol = solve_milp(problem)
        status, best = enumerate_binaries_optimum(problem)
        assert sol.status == status
        if status == "optimal":
            assert sol.objective == pytest.approx(best, abs=1e-6)


def test_matches_enumeration_twelve_binaries():
    rng = np.random.default_rng(19)
    for trial in range(3):
        problem = random_mixed_problem(rng, n_cont=2, n_bin=12)
        sol = solve_milp(problem)
        status, best = enumerate_binaries_optimum(problem)
        assert sol.status == status
        if status == "optimal":
            assert sol.objective == pytest.approx(best, abs=1e-6)


def test_incumbent_history_monotone():
    rng = np.random.default_rng(23)
    for trial in range(10):
        problem = random_mixed_problem(rng, n_cont=3, n_bin=8)
        sol = solve_milp(problem)
        values = [v for _, v in sol.incumbent_history]
        assert all(b < a for a, b in zip(values, values[1:]))
        if sol.status == "optimal" and values:
            assert sol.objective == values[-1]


def test_node_limit_statuses():
    rng = np.random.default_rng(31)
    problem = random_mixed_problem(rng, n_cont=3, n_bin=10)
    sol = solve_milp(problem, node_limit=1)
    assert sol.status in ("limit_feasible", "limit_unknown", "optimal")
    if sol.status.startswith("limit"):
        full = solve_milp(problem)
        assert sol.best_bound <= full.objective + 1e-9
        # seeding the limited run with the true optimum keeps it feasible
        seeded = solve_milp(
            problem, node_limit=1, initial_incumbent=(full.x, full.objective)
        )
        assert seeded.status in ("limit_feasible", "optimal")
        assert seeded.objective <= full.objective + 1e-9


def test_initial_incumbent_not_degraded():
    rng = np.random.default_rng(37)
    problem = random_mixed_problem(rng, n_cont=2, n_bin=6)
    full = solve_milp(problem)
    assert full.status == "optimal"
    sol = solve_milp(problem, initial_incumbent=(full.x, full.objective))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(full.objective, abs=1e-9)


def test_bad_binary_index_rejected():
    lp = LinearProgram.build(c=[1.0], bounds=[(0.0, 1.0)])
    with pytest.raises(MilpError):
        MilpProblem(lp, (3,))
    lp2 = LinearProgram.build(c=[1.0], bounds=[(0.0, 2.0)])
    with pytest.raises(MilpError):
        MilpProblem(lp2, (0,))
