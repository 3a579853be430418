"""Brute-force references for desk-scale verification.

Everything here is implemented independently of the solver modules it
checks: its own cost coefficients, its own feasibility arithmetic, its
own overlap formulas.  Slow on purpose; guarded against combinatorial
blowup.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import point_distance
from .scenario import Scenario
from .tours import Path

EVAL_GUARD = 10**8
OVERLAP_TOL = 1e-9


class OracleError(Exception):
    """Grid too large or preconditions unmet."""


@dataclass(frozen=True)
class GridSpec:
    resolution: float
    bounds: tuple[tuple[float, float], ...] | None = None
    """Per-variable ranges; None means the natural range of each variable."""

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise OracleError(f"resolution must be positive, got {self.resolution}")


def _independent_coefficients(cost, scenario: Scenario, pairs):
    """Cost coefficients recomputed from scratch (no coverage module)."""
    c_theta, c_rho = [], []
    for aid, _, pid in pairs:
        agent = scenario.agent_by_id(aid)
        point = scenario.point_by_id(pid)
        inv_dist = 1.0
        if agent.reachable:
            reach = max(
                point_distance(agent.home, scenario.point_by_id(r).position)
                for r in agent.reachable
            )
            if reach > 0:
                d = point_distance(agent.home, point.position) / reach
                inv_dist = 1.0 / max(d, 1e-3)
        omega = 1.0
        if cost.weights is not None:
            omega = cost.weights.get((aid, pid), 1.0)
        ct, cr = {
            "f1": (-1.0, 1.0 / agent.max_production),
            "f2": (0.0, 1.0 / agent.max_production),
            "f3": (-inv_dist, 1.0 / agent.max_production),
            "f4": (-inv_dist, point.required_rate / agent.max_production**2),
            "f5": (-omega, 0.0),
            "f6": (-omega, point.required_rate / agent.max_production**2),
        }[cost.kind]
        c_theta.append(ct)
        c_rho.append(cr)
    return np.array(c_theta), np.array(c_rho)


def _simplex_grid(levels: list[int], budget_levels: int) -> np.ndarray:
    """Integer tuples with per-axis caps and a total-sum cap."""
    rows: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int, axis: int) -> None:
        if axis == len(levels):
            rows.append(prefix)
            return
        for v in range(min(levels[axis], remaining) + 1):
            rec(prefix + (v,), remaining - v, axis + 1)

    rec((), budget_levels, 0)
    return np.array(rows, dtype=np.int64).reshape(len(rows), len(levels))


def _min_cost_fill(
    ks: list[int], theta: np.ndarray, rho_max: np.ndarray, c_rho: np.ndarray, need: float
) -> tuple[float, dict[int, float]] | None:
    """Cheapest productions delivering exactly `need` at fixed hover times.

    Delivery from pair k is theta[k] * rho[k]; filling greedily by cost
    per delivered unit is exact for this one-constraint problem.
    """
    active = [k for k in ks if theta[k] > 0]
    capacity = sum(theta[k] * rho_max[k] for k in active)
    if capacity < need * (1 - 1e-12):
        return None
    order = sorted(active, key=lambda k: (c_rho[k] / theta[k], k))
    left = need
    cost = 0.0
    fill: dict[int, float] = {}
    for k in order:
        amount = min(left, theta[k] * rho_max[k])
        rho_k = amount / theta[k]
        fill[k] = rho_k
        cost += c_rho[k] * rho_k
        left -= amount
        if left <= need * 1e-15:
            break
    if left > need * 1e-9:
        return None
    return cost, fill


def brute_force_times(
    scenario: Scenario,
    paths: list[Path],
    cost,
    grid: GridSpec,
    allow_shared_coverage: bool = False,
):
    """Exhaustive hover-time grid with exact best productions at each node.

    Returns (theta map, rho map, cost) for the best feasible grid point,
    or None if no grid point is feasible.  Hover times are enumerated on
    the grid; productions are not gridded because the best rho for fixed
    theta decomposes into an exact per-point fill.
    """
    pairs = [
        (path.agent_id, j, pid)
        for path in paths
        for j, pid in enumerate(path.order)
    ]
    n = len(pairs)
    if n == 0:
        raise OracleError("no agent-point pairs to optimize")
    if n > 6:
        raise OracleError(f"{n} pairs exceed the supported size (6)")

    res = grid.resolution
    budgets = {
        p.agent_id: 1.0 - (p.normalized_moving_time or 0.0) for p in paths
    }
    if grid.bounds is not None and len(grid.bounds) != n:
        raise OracleError(f"bounds cover {len(grid.bounds)} of {n} variables")
    levels = []
    for k, (aid, _, _) in enumerate(pairs):
        hi = min(1.0, budgets[aid])
        if grid.bounds is not None:
            hi = min(hi, grid.bounds[k][1])
        levels.append(int(math.floor(hi / res + 1e-9)))
    raw = 1.0
    for lv in levels:
        raw *= lv + 1
    if raw > EVAL_GUARD:
        raise OracleError(
            f"grid would evaluate {raw:.2e} nodes (guard {EVAL_GUARD:.0e})"
        )

    c_theta, c_rho = _independent_coefficients(cost, scenario, pairs)
    rho_max = np.array([scenario.agent_by_id(a).max_production for a, _, _ in pairs])
    rates = {p.id: p.required_rate for p in scenario.points}

    agent_ids = [p.agent_id for p in paths if p.order]
    agent_cols = {aid: [] for aid in agent_ids}
    for k, (aid, _, _) in enumerate(pairs):
        agent_cols[aid].append(k)
    point_cols: dict[int, list[int]] = {}
    for k, (_, _, pid) in enumerate(pairs):
        point_cols.setdefault(pid, []).append(k)
    if set(point_cols) != {p.id for p in scenario.points}:
        return None  # a point is in no tour: every grid node infeasible

    per_agent = [
        _simplex_grid(
            [levels[k] for k in agent_cols[aid]],
            int(math.floor(budgets[aid] / res + 1e-9)),
        )
        for aid in agent_ids
    ]
    sizes = [g.shape[0] for g in per_agent]
    total = int(np.prod(sizes))

    best: tuple[float, np.ndarray, dict[int, float]] | None = None
    chunk = 1 << 17
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        multi = np.unravel_index(idx, sizes)
        theta_block = np.zeros((len(idx), n))
        for a, aid in enumerate(agent_ids):
            theta_block[:, agent_cols[aid]] = per_agent[a][multi[a]] * res
        mask = np.ones(len(idx), dtype=bool)
        for pid, ks in point_cols.items():
            block = theta_block[:, ks]
            if not allow_shared_coverage:
                mask &= block.sum(axis=1) <= 1.0 + 1e-9
            mask &= (block * rho_max[ks]).sum(axis=1) >= rates[pid] * (1 - 1e-12)
        for theta in theta_block[mask]:
            value = float(c_theta @ theta)
            fills: dict[int, float] = {}
            ok = True
            for pid, ks in point_cols.items():
                filled = _min_cost_fill(ks, theta, rho_max, c_rho, rates[pid])
                if filled is None:
                    ok = False
                    break
                value += filled[0]
                fills.update(filled[1])
            if ok and (best is None or value < best[0] - 1e-15):
                best = (value, theta.copy(), fills)

    if best is None:
        return None
    value, theta, fills = best
    theta_map = {(aid, j): float(theta[k]) for k, (aid, j, _) in enumerate(pairs)}
    rho_map = {(aid, j): float(fills.get(k, 0.0)) for k, (aid, j, _) in enumerate(pairs)}
    return theta_map, rho_map, value
