"""Mixed-integer linear programming via best-first branch and bound.

Binary variables only (the scheduling stage needs nothing more general).
Relaxations are solved with the bundled simplex; nodes are explored
best-bound first so the gap shrinks as fast as the relaxation allows.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .lp import LinearProgram, LpError, solve_lp

INT_TOL = 1e-6
PRUNE_TOL = 1e-9


class MilpError(Exception):
    pass


@dataclass
class MilpProblem:
    """A linear program plus a set of variable indices restricted to {0, 1}.

    The bounds stored in `lp` must already contain the binaries' [0, 1]
    boxes (or tighter, e.g. [0, 0] for a binary fixed by construction).
    """

    lp: LinearProgram
    binary_indices: tuple[int, ...]

    def __post_init__(self) -> None:
        n = self.lp.n_vars
        for k in self.binary_indices:
            if not 0 <= k < n:
                raise MilpError(f"binary index {k} out of range for {n} variables")
            lo, hi = self.lp.bounds[k]
            if lo is None or hi is None or lo < -INT_TOL or hi > 1.0 + INT_TOL:
                raise MilpError(f"binary variable {k} must have bounds inside [0, 1]")


@dataclass
class MilpSolution:
    status: str
    """One of optimal, infeasible, limit_feasible, limit_unknown."""

    x: np.ndarray | None
    objective: float | None
    best_bound: float
    """Proven lower bound on the optimum (equals objective when optimal)."""

    nodes_explored: int
    incumbent_history: list[tuple[int, float]] = field(default_factory=list)
    """(node count, objective) pairs, one per incumbent improvement."""


def _is_integral(x: np.ndarray, binaries: tuple[int, ...]) -> bool:
    for k in binaries:
        if abs(x[k] - round(x[k])) > INT_TOL:
            return False
    return True


def _most_fractional(x: np.ndarray, binaries: tuple[int, ...]) -> int:
    best_k = -1
    best_dist = -1.0
    for k in binaries:
        dist = 0.5 - abs(x[k] - np.floor(x[k]) - 0.5)
        if dist > best_dist + 1e-12:
            best_dist = dist
            best_k = k
    return best_k


def solve_milp(
    problem: MilpProblem,
    node_limit: int = 200_000,
    initial_incumbent: tuple[np.ndarray, float] | None = None,
) -> MilpSolution:
    """Minimize over the mixed-binary feasible set.

    initial_incumbent, when given, is an (x, objective) pair known to be
    feasible; it seeds the pruning bound and is returned unchanged if no
    node beats it.
    """
    lp0 = problem.lp
    binaries = problem.binary_indices

    incumbent_x: np.ndarray | None = None
    incumbent_obj = np.inf
    history: list[tuple[int, float]] = []
    if initial_incumbent is not None:
        incumbent_x = np.asarray(initial_incumbent[0], dtype=float).copy()
        incumbent_obj = float(initial_incumbent[1])
        history.append((0, incumbent_obj))

    # each heap entry: (bound, tiebreak counter, bounds overrides dict)
    counter = 0
    heap: list[tuple[float, int, dict[int, tuple[float, float]]]] = []

    def relax_and_push(fixed: dict[int, tuple[float, float]]) -> None:
        nonlocal counter
        bounds = list(lp0.bounds)
        for k, box in fixed.items():
            bounds[k] = box
        sub = LinearProgram(
            c=lp0.c,
            a_eq=lp0.a_eq,
            b_eq=lp0.b_eq,
            a_ub=lp0.a_ub,
            b_ub=lp0.b_ub,
            bounds=bounds,
            objective_const=lp0.objective_const,
        )
        sol = solve_lp(sub)
        if sol.status == "infeasible":
            return
        if sol.status == "unbounded":
            raise MilpError("relaxation is unbounded; the model is missing bounds")
        node_store[counter] = (sol.objective, sol.x, fixed)
        heapq.heappush(heap, (sol.objective, counter, fixed))
        counter += 1

    node_store: dict[int, tuple[float, np.ndarray, dict]] = {}
    nodes = 0
    try:
        relax_and_push({})
    except LpError as exc:
        raise MilpError(f"root relaxation failed: {exc}") from exc

    if not heap:
        if incumbent_x is not None:
            return MilpSolution(
                "optimal", incumbent_x, incumbent_obj, incumbent_obj, 0, history
            )
        return MilpSolution("infeasible", None, None, np.inf, 0, history)

    best_open_bound = heap[0][0]
    while heap:
        bound, node_id, fixed = heapq.heappop(heap)
        obj, x, _ = node_store.pop(node_id)
        best_open_bound = bound
        if bound >= incumbent_obj - PRUNE_TOL:
            # best-first order: every remaining node is at least as bad
            best_open_bound = incumbent_obj
            heap.clear()
            node_store.clear()
            break
        nodes += 1
        if nodes > node_limit:
            heapq.heappush(heap, (bound, node_id, fixed))  # count it as open
            break

        if _is_integral(x, binaries):
            if obj < incumbent_obj - PRUNE_TOL:
                incumbent_obj = obj
                incumbent_x = x.copy()
                for k in binaries:
                    incumbent_x[k] = round(incumbent_x[k])
                history.append((nodes, incumbent_obj))
            continue

        k = _most_fractional(x, binaries)
        for box in ((0.0, 0.0), (1.0, 1.0)):
            child = dict(fixed)
            child[k] = box
            try:
                relax_and_push(child)
            except LpError as exc:
                raise MilpError(f"node relaxation failed: {exc}") from exc

    if heap:  # stopped on the node limit
        open_bound = min(best_open_bound, heap[0][0])
        if incumbent_x is not None:
            return MilpSolution(
                "limit_feasible", incumbent_x, incumbent_obj, open_bound, nodes, history
            )
        return MilpSolution("limit_unknown", None, None, open_bound, nodes, history)

    if incumbent_x is None:
        return MilpSolution("infeasible", None, None, np.inf, nodes, history)
    return MilpSolution(
        "optimal", incumbent_x, incumbent_obj, incumbent_obj, nodes, history
    )
