"""Coverage-time and production optimization over fixed tours.

Given tours and a period, this module decides how long each agent hovers
at each of its tour points (theta, fraction of the period) and at what
rate it delivers while doing so (rho).  The delivery constraint
sum(rho * theta) = required_rate per point is bilinear, so it is solved
by alternating convex search: fix rho and solve the LP in theta, then fix
theta and solve the LP in rho, repeating until the cost stops improving.

During the theta step the delivery constraint is relaxed to >= (the team
may over-deliver); the following rho step restores equality by scaling
production down.  Both directions keep the cost from increasing, which
gives monotone descent.  With equality enforced in both blocks the very
first iterate would be a fixed point and e.g. a single agent with spare
production would never trade production for hover time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .geometry import point_distance
from .lp import LinearProgram, solve_lp
from .scenario import Scenario
from .tours import Path, compute_period, plan_tour, stationary_path

log = logging.getLogger(__name__)

CONVERGENCE_TOL = 1e-8
MAX_ROUNDS = 50
ZERO_THETA_TOL = 1e-9
MIN_DIST_WEIGHT = 1e-3
# nudges degenerate LP blocks (f2 has no theta term, f5 no rho term)
# toward long hovers and low productions without moving real optima
TIE_BREAK = 1e-9

COST_KINDS = ("f1", "f2", "f3", "f4", "f5", "f6")


class CoverageError(Exception):
    """No (theta, rho) satisfies the delivery and budget constraints."""


@dataclass(frozen=True)
class CostFunction:
    kind: str
    weights: dict[tuple[int, int], float] | None = None
    """Optional (agent id, point id) -> omega, used by f5/f6; missing
    entries fall back to 1, which reduces f5 to plain hover-time credit."""

    def __post_init__(self) -> None:
        if self.kind not in COST_KINDS:
            raise ValueError(f"unknown cost function {self.kind!r}")
        if self.weights is not None:
            for key, w in self.weights.items():
                if w <= 0:
                    raise ValueError(f"weight for {key} must be positive, got {w}")

    def weight(self, agent_id: int, point_id: int) -> float:
        if self.weights is None:
            return 1.0
        return self.weights.get((agent_id, point_id), 1.0)


@dataclass
class CoverageAssignment:
    theta: dict[tuple[int, int], float]
    """(agent id, tour index) -> hover time as a fraction of the period."""

    rho: dict[tuple[int, int], float]
    cost_value: float
    cost_history: tuple[float, ...] = ()
    """Exact cost after each alternation round; nonincreasing."""


def tour_pairs(paths: list[Path]) -> list[tuple[int, int, int]]:
    """All (agent id, tour index, point id) triples across the team."""
    return [
        (path.agent_id, j, pid)
        for path in paths
        for j, pid in enumerate(path.order)
    ]


def _max_reach(scenario: Scenario, agent_id: int) -> float:
    agent = scenario.agent_by_id(agent_id)
    if not agent.reachable:
        return 0.0
    return max(
        point_distance(agent.home, scenario.point_by_id(pid).position)
        for pid in agent.reachable
    )


def _distance_weight(scenario: Scenario, agent_id: int, point_id: int) -> float:
    """theta weight for f3/f4: inverse distance home->point, normalized
    by the agent's maximum reach and clamped away from zero."""
    reach = _max_reach(scenario, agent_id)
    if reach <= 0.0:
        return 1.0
    d = point_distance(
        scenario.agent_by_id(agent_id).home, scenario.point_by_id(point_id).position
    )
    return 1.0 / max(d / reach, MIN_DIST_WEIGHT)


def cost_coefficients(
    cost: CostFunction, scenario: Scenario, paths: list[Path]
) -> tuple[list[tuple[int, int, int]], np.ndarray, np.ndarray]:
    """Per-pair linear coefficients (c_theta, c_rho) of the chosen cost."""
    pairs = tour_pairs(paths)
    c_theta = np.zeros(len(pairs))
    c_rho = np.zeros(len(pairs))
    for k, (aid, _, pid) in enumerate(pairs):
        agent = scenario.agent_by_id(aid)
        rate = scenario.point_by_id(pid).required_rate
        if cost.kind == "f1":
            c_theta[k] = -1.0
            c_rho[k] = 1.0 / agent.max_production
        elif cost.kind == "f2":
            c_rho[k] = 1.0 / agent.max_production
        elif cost.kind == "f3":
            c_theta[k] = -_distance_weight(scenario, aid, pid)
            c_rho[k] = 1.0 / agent.max_production
        elif cost.kind == "f4":
            c_theta[k] = -_distance_weight(scenario, aid, pid)
            c_rho[k] = rate / agent.max_production**2
        elif cost.kind == "f5":
            c_theta[k] = -cost.weight(aid, pid)
        else:  # f6
            c_theta[k] = -cost.weight(aid, pid)
            c_rho[k] = rate / agent.max_production**2
    return pairs, c_theta, c_rho


def evaluate_cost(
    cost: CostFunction,
    assignment: CoverageAssignment,
    scenario: Scenario,
    paths: list[Path],
) -> float:
    """Exact cost formula value, free of any solver scaling or tie-breaks."""
    pairs, c_theta, c_rho = cost_coefficients(cost, scenario, paths)
    return float(
        sum(
            c_theta[k] * assignment.theta[(aid, j)]
            + c_rho[k] * assignment.rho[(aid, j)]
            for k, (aid, j, _) in enumerate(pairs)
        )
    )


def homogeneity(
    assignment: CoverageAssignment, scenario: Scenario, paths: list[Path]
) -> float:
    """Sum of (theta - required_rate / max_production)^2 over tour pairs;
    small values mean hover times track normalized demand evenly."""
    total = 0.0
    for aid, j, pid in tour_pairs(paths):
        agent = scenario.agent_by_id(aid)
        rate = scenario.point_by_id(pid).required_rate
        total += (assignment.theta[(aid, j)] - rate / agent.max_production) ** 2
    return total


def _diagnose_infeasible(
    scenario: Scenario, paths: list[Path], allow_shared_coverage: bool
) -> str:
    pairs = tour_pairs(paths)
    by_point: dict[int, list[int]] = {}
    for aid, _, pid in pairs:
        by_point.setdefault(pid, []).append(aid)
    for p in scenario.points:
        agents = by_point.get(p.id, [])
        if not agents:
            return f"point {p.id} appears in no tour"
        cap = sum(scenario.agent_by_id(a).max_production for a in agents)
        if cap < p.required_rate:
            return (
                f"point {p.id}: touring agents produce at most {cap:g} "
                f"< required {p.required_rate:g}"
            )
        best = max(scenario.agent_by_id(a).max_production for a in agents)
        if not allow_shared_coverage and best < p.required_rate:
            return (
                f"point {p.id}: hover time is capped at one period and the "
                f"strongest touring agent produces {best:g} "
                f"< required {p.required_rate:g}"
            )
    for path in paths:
        if path.normalized_moving_time and path.normalized_moving_time >= 1.0:
            return f"agent {path.agent_id}: no hover budget left after travel"
    return "combined hover budgets are too tight across shared points"


def optimize_times_productions(
    scenario: Scenario,
    paths: list[Path],
    cost: CostFunction,
    allow_shared_coverage: bool = False,
    max_rounds: int = MAX_ROUNDS,
    tol: float = CONVERGENCE_TOL,
) -> CoverageAssignment:
    """Alternating convex search for hover times and production rates.

    Starts from rho at its maximum, which makes the first theta step the
    least constrained.  Deterministic: the simplex uses Bland's rule and
    the tie-break terms resolve degenerate objectives.
    """
    for path in paths:
        if path.order and path.normalized_moving_time is None:
            raise ValueError(
                f"agent {path.agent_id}: compute_period must run before "
                "optimization"
            )

    pairs, c_theta, c_rho = cost_coefficients(cost, scenario, paths)
    n = len(pairs)
    rate_of = {p.id: p.required_rate for p in scenario.points}
    rho_max = np.array(
        [scenario.agent_by_id(aid).max_production for aid, _, _ in pairs]
    )

    agent_rows = {path.agent_id: [] for path in paths}
    point_rows: dict[int, list[int]] = {p.id: [] for p in scenario.points}
    for k, (aid, _, pid) in enumerate(pairs):
        agent_rows[aid].append(k)
        point_rows[pid].append(k)
    budget = {
        path.agent_id: 1.0 - (path.normalized_moving_time or 0.0) for path in paths
    }

    def theta_step(rho: np.ndarray) -> np.ndarray | None:
        rows, rhs = [], []
        for path in paths:
            row = np.zeros(n)
            row[agent_rows[path.agent_id]] = 1.0
            rows.append(row)
            rhs.append(budget[path.agent_id])
        for pid, ks in point_rows.items():
            if not allow_shared_coverage:
                row = np.zeros(n)
                row[ks] = 1.0
                rows.append(row)
                rhs.append(1.0)
            # delivery, relaxed to >=; scaled by the rate so rows are O(1)
            row = np.zeros(n)
            row[ks] = -rho[ks] / rate_of[pid]
            rows.append(row)
            rhs.append(-1.0)
        lp = LinearProgram.build(
            c=c_theta - TIE_BREAK,
            a_ub=np.array(rows),
            b_ub=np.array(rhs),
            bounds=[(0.0, 1.0)] * n,
        )
        sol = solve_lp(lp)
        return sol.x if sol.status == "optimal" else None

    def rho_step(theta: np.ndarray) -> np.ndarray:
        # variables are u = rho / rho_max in [0, 1]; equality restores
        # exact delivery, feasible because scaling rho down per point works
        rows, rhs = [], []
        for pid, ks in point_rows.items():
            row = np.zeros(n)
            row[ks] = rho_max[ks] * theta[ks] / rate_of[pid]
            rows.append(row)
            rhs.append(1.0)
        lp = LinearProgram.build(
            c=c_rho * rho_max + TIE_BREAK,
            a_eq=np.array(rows),
            b_eq=np.array(rhs),
            bounds=[(0.0, 1.0)] * n,
        )
        sol = solve_lp(lp)
        if sol.status != "optimal":
            raise CoverageError(
                "production step lost feasibility; this indicates a solver "
                f"defect ({sol.status})"
            )
        return sol.x * rho_max

    def exact_cost(theta: np.ndarray, rho: np.ndarray) -> float:
        return float(c_theta @ theta + c_rho @ rho)

    rho = rho_max.copy()
    history: list[float] = []
    theta = None
    for _ in range(max_rounds):
        new_theta = theta_step(rho)
        if new_theta is None:
            if theta is None:
                raise CoverageError(
                    "no feasible hover times exist: "
                    + _diagnose_infeasible(scenario, paths, allow_shared_coverage)
                )
            raise CoverageError(
                "hover-time step lost feasibility; this indicates a solver defect"
            )
        theta = new_theta
        rho = rho_step(theta)
        history.append(exact_cost(theta, rho))
        if len(history) > 1 and history[-2] - history[-1] < tol:
            break

    theta_map = {(aid, j): float(theta[k]) for k, (aid, j, _) in enumerate(pairs)}
    rho_map = {(aid, j): float(rho[k]) for k, (aid, j, _) in enumerate(pairs)}
    return CoverageAssignment(
        theta=theta_map,
        rho=rho_map,
        cost_value=history[-1] if history else 0.0,
        cost_history=tuple(history),
    )


def shorten_paths(
    scenario: Scenario,
    paths: list[Path],
    assignment: CoverageAssignment,
    cost: CostFunction,
    theta_m_max: float = 0.3,
    default_period: float = 1.0,
    period_override: float | None = None,
    allow_shared_coverage: bool = False,
) -> tuple[list[Path], CoverageAssignment, float, int]:
    """Drop zero-hover tour points, re-plan, re-optimize, repeat.

    Returns (paths, assignment, period, iterations) where iterations
    counts assignments examined (1 when nothing is removable).  If a
    re-optimization unexpectedly fails the last feasible iterate is
    returned instead.
    """
    period = compute_period(paths, theta_m_max, default_period, period_override)
    iterations = 1
    max_iterations = 1 + sum(len(p.order) for p in paths)

    while iterations <= max_iterations:
        removable: dict[int, set[int]] = {}
        for (aid, j), th in assignment.theta.items():
            if th <= ZERO_THETA_TOL:
                removable.setdefault(aid, set()).add(j)
        if not removable:
            break

        new_paths = []
        for path in paths:
            drop = removable.get(path.agent_id)
            if not drop:
                new_paths.append(path)
                continue
            keep_ids = [pid for j, pid in enumerate(path.order) if j not in drop]
            agent = scenario.agent_by_id(path.agent_id)
            if not keep_ids:
                new_paths.append(stationary_path(agent))
                continue
            replanned = plan_tour(
                agent, [scenario.point_by_id(pid) for pid in keep_ids]
            )
            # splicing the dropped points out of the old order cannot beat
            # the triangle inequality, so taking the shorter of replan and
            # splice guarantees the tour never grows
            old_order = [pid for pid in path.order if pid in keep_ids]
            spliced_path = _tour_from_order(agent, scenario, old_order)
            new_paths.append(
                replanned
                if replanned.tour_length <= spliced_path.tour_length
                else spliced_path
            )

        new_period = compute_period(
            new_paths, theta_m_max, default_period, period_override
        )
        try:
            new_assignment = optimize_times_productions(
                scenario, new_paths, cost, allow_shared_coverage
            )
        except CoverageError as exc:
            log.warning(
                "re-optimization after shortening failed (%s); keeping the "
                "last feasible plan",
                exc,
            )
            compute_period(paths, theta_m_max, default_period, period_override)
            return paths, assignment, period, iterations
        paths, assignment, period = new_paths, new_assignment, new_period
        iterations += 1

    return paths, assignment, period, iterations


def _tour_from_order(scenario_agent, scenario: Scenario, order: list[int]) -> Path:
    pos = {pid: scenario.point_by_id(pid).position for pid in order}
    n = len(order)
    legs = tuple(
        point_distance(pos[order[j]], pos[order[(j + 1) % n]]) for j in range(n)
    )
    length = sum(legs)
    return Path(
        agent_id=scenario_agent.id,
        order=tuple(order),
        leg_lengths=legs,
        tour_length=length,
        tour_time=length / scenario_agent.speed,
    )


@dataclass(frozen=True)
class AgentTimeline:
    """One agent's periodic plan as fractions of the period.

    Interval j covers order[j] during [arrivals[j], departures[j]] and
    then travels leg j during [move_starts[j], move_ends[j]].  The last
    movement always ends at 1, absorbing any slack: the agent traverses
    its final leg over the whole remaining window.
    """

    agent_id: int
    arrivals: tuple[float, ...]
    departures: tuple[float, ...]
    move_starts: tuple[float, ...]
    move_ends: tuple[float, ...]


@dataclass
class Timeline:
    rows: dict[int, AgentTimeline]


def build_timeline(paths: list[Path], assignment: CoverageAssignment) -> Timeline:
    rows: dict[int, AgentTimeline] = {}
    for path in paths:
        n = len(path.order)
        if n == 0:
            rows[path.agent_id] = AgentTimeline(path.agent_id, (), (), (), ())
            continue
        if path.normalized_moving_time is None:
            raise ValueError(f"agent {path.agent_id}: period not computed")
        theta = [assignment.theta[(path.agent_id, j)] for j in range(n)]
        if path.tour_length > 0:
            leg_norm = [
                leg / path.tour_length * path.normalized_moving_time
                for leg in path.leg_lengths
            ]
        else:
            leg_norm = [0.0] * n
        arrivals, departures = [0.0], []
        for j in range(n):
            departures.append(arrivals[j] + theta[j])
            if j < n - 1:
                arrivals.append(departures[j] + leg_norm[j])
        if departures[-1] + leg_norm[-1] > 1.0 + 1e-9:
            raise ValueError(
                f"agent {path.agent_id}: plan occupies "
                f"{departures[-1] + leg_norm[-1]:.9f} > 1 period; the "
                "assignment violates its own budget"
            )
        move_starts = list(departures)
        move_ends = arrivals[1:] + [1.0]
        rows[path.agent_id] = AgentTimeline(
            path.agent_id,
            tuple(arrivals),
            tuple(departures),
            tuple(move_starts),
            tuple(move_ends),
        )
    return Timeline(rows)


def assignment_to_dict(
    paths: list[Path], assignment: CoverageAssignment, timeline: Timeline
) -> dict:
    """Export: agent -> tour entries with times; ready for JSON dumping."""
    agents = []
    for path in sorted(paths, key=lambda p: p.agent_id):
        row = timeline.rows[path.agent_id]
        tour = [
            {
                "point": pid,
                "theta": assignment.theta[(path.agent_id, j)],
                "rho": assignment.rho[(path.agent_id, j)],
                "arrival": row.arrivals[j],
                "departure": row.departures[j],
            }
            for j, pid in enumerate(path.order)
        ]
        agents.append({"id": path.agent_id, "tour": tour})
    return {"agents": agents, "cost": assignment.cost_value}
