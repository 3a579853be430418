"""Closed-tour construction and team period selection.

Each agent repeats a closed tour over its points once per period.  Tours
come from nearest-neighbor construction polished by 2-opt; exact tours
are a non-goal since the downstream optimization only needs travel times.
The team period is set so the slowest tour uses exactly the allowed
moving fraction of the period.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import Point2, point_distance
from .scenario import Agent, InterestPoint


@dataclass
class Path:
    """One agent's closed tour.

    Leg j runs from order[j] to order[(j+1) % n], so a single-point tour
    has one zero-length leg and a stationary agent (empty order) has none.
    normalized_moving_time stays None until a period is chosen.
    """

    agent_id: int
    order: tuple[int, ...]
    leg_lengths: tuple[float, ...]
    tour_length: float
    tour_time: float
    normalized_moving_time: float | None = None


def stationary_path(agent: Agent) -> Path:
    """Path for an agent with nothing to visit; it parks at home."""
    return Path(agent.id, (), (), 0.0, 0.0, None)


def _tour_legs(order: list[int], pos: dict[int, Point2]) -> tuple[float, ...]:
    n = len(order)
    return tuple(
        point_distance(pos[order[j]], pos[order[(j + 1) % n]]) for j in range(n)
    )


def _nearest_neighbor(order_pool: list[int], pos: dict[int, Point2]) -> list[int]:
    # start at the lowest id; ties on distance also go to the lower id
    remaining = sorted(order_pool)
    tour = [remaining.pop(0)]
    while remaining:
        here = pos[tour[-1]]
        best = min(remaining, key=lambda pid: (point_distance(here, pos[pid]), pid))
        remaining.remove(best)
        tour.append(best)
    return tour


def _two_opt(order: list[int], pos: dict[int, Point2]) -> list[int]:
    """First-improvement 2-opt, scanning (i, j) pairs lexicographically.

    order[0] stays fixed, which both anchors the rotation and makes the
    result deterministic.
    """
    n = len(order)
    if n < 4:
        return order
    improved = True
    while improved:
        improved = False
        for i in range(1, n - 1):
            for j in range(i + 1, n):
                a, b = order[i - 1], order[i]
                c, d = order[j], order[(j + 1) % n]
                if a == c or b == d:
                    continue
                delta = (
                    point_distance(pos[a], pos[c])
                    + point_distance(pos[b], pos[d])
                    - point_distance(pos[a], pos[b])
                    - point_distance(pos[c], pos[d])
                )
                if delta < -1e-12:
                    order[i : j + 1] = reversed(order[i : j + 1])
                    improved = True
                    break
            if improved:
                break
    return order


def plan_tour(agent: Agent, points: list[InterestPoint]) -> Path:
    """Closed tour over the given points, nearest-neighbor then 2-opt."""
    if not points:
        raise ValueError(f"agent {agent.id}: cannot plan a tour over zero points")
    ids = [p.id for p in points]
    unknown = [pid for pid in ids if pid not in agent.reachable]
    if unknown:
        raise ValueError(f"agent {agent.id}: points {unknown} are not reachable")
    pos = {p.id: p.position for p in points}
    order = _two_opt(_nearest_neighbor(ids, pos), pos)
    legs = _tour_legs(order, pos)
    length = sum(legs)
    return Path(
        agent_id=agent.id,
        order=tuple(order),
        leg_lengths=legs,
        tour_length=length,
        tour_time=length / agent.speed,
    )


def reverse_path(path: Path) -> Path:
    """Same tour walked the other way; the first point stays the anchor."""
    if len(path.order) < 2:
        return Path(
            path.agent_id,
            path.order,
            path.leg_lengths,
            path.tour_length,
            path.tour_time,
            path.normalized_moving_time,
        )
    order = (path.order[0],) + tuple(reversed(path.order[1:]))
    legs = tuple(reversed(path.leg_lengths))
    return Path(
        path.agent_id,
        order,
        legs,
        path.tour_length,
        path.tour_time,
        path.normalized_moving_time,
    )


def compute_period(
    paths: list[Path],
    theta_m_max: float = 0.3,
    default_period: float = 1.0,
    period_override: float | None = None,
) -> float:
    """Pick the team period and stamp each path's normalized moving time.

    T = max_i tour_time_i / theta_m_max, so the slowest agent moves for
    exactly the allowed fraction.  All-stationary teams get the default
    period (there is nothing to scale against).
    """
    if not 0 < theta_m_max < 1:
        raise ValueError(f"theta_m_max must lie in (0, 1), got {theta_m_max}")
    if period_override is not None:
        if period_override <= 0:
            raise ValueError(f"period must be positive, got {period_override}")
        period = period_override
    else:
        slowest = max((p.tour_time for p in paths), default=0.0)
        period = slowest / theta_m_max if slowest > 0 else default_period
    for p in paths:
        p.normalized_moving_time = p.tour_time / period
        if p.normalized_moving_time >= 1.0:
            raise ValueError(
                f"agent {p.agent_id}: tour time {p.tour_time:g} does not fit "
                f"in period {period:g}"
            )
    return period
