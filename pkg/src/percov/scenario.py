"""Scenario model: interest points, agents, and pre-flight feasibility checks.

A scenario is a set of fixed interest points, each demanding a sustained
delivery rate, plus a team of circular agents that travel between points
and deliver while hovering.  Scenarios are stored as plain JSON so they
can be versioned and diffed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .geometry import Point2, point_distance


class ScenarioError(Exception):
    """Raised when a scenario file is malformed or self-contradictory."""


@dataclass(frozen=True)
class InterestPoint:
    id: int
    position: Point2
    required_rate: float
    """Sustained delivery rate the point must receive, averaged per period."""


@dataclass(frozen=True)
class Agent:
    id: int
    home: Point2
    radius: float
    """Collision radius; two agents closer than the sum of radii conflict."""

    speed: float
    max_production: float
    """Peak delivery rate while hovering over a point."""

    reachable: tuple[int, ...]
    """Ids of the interest points this agent is allowed to serve."""


@dataclass
class Scenario:
    name: str
    points: list[InterestPoint]
    agents: list[Agent]
    units: dict[str, str] = field(default_factory=dict)
    description: str = ""

    def point_by_id(self, pid: int) -> InterestPoint:
        for p in self.points:
            if p.id == pid:
                return p
        raise ScenarioError(f"point {pid}: no such interest point")

    def agent_by_id(self, aid: int) -> Agent:
        for a in self.agents:
            if a.id == aid:
                return a
        raise ScenarioError(f"agent {aid}: no such agent")

    def agents_reaching(self, pid: int) -> list[Agent]:
        return [a for a in self.agents if pid in a.reachable]


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ScenarioError(message)


def _as_point(value, owner: str) -> Point2:
    _require(
        isinstance(value, (list, tuple)) and len(value) == 2,
        f"{owner}: position must be a [x, y] pair",
    )
    x, y = value
    _require(
        isinstance(x, (int, float)) and isinstance(y, (int, float)),
        f"{owner}: coordinates must be numbers",
    )
    return Point2(float(x), float(y))


def _parse_point(raw: dict, index: int) -> InterestPoint:
    _require(isinstance(raw, dict), f"points[{index}]: expected an object")
    _require("id" in raw, f"points[{index}]: missing id")
    pid = raw["id"]
    _require(isinstance(pid, int), f"points[{index}]: id must be an integer")
    owner = f"point {pid}"
    _require("position" in raw, f"{owner}: missing position")
    _require("required_rate" in raw, f"{owner}: missing required_rate")
    rate = raw["required_rate"]
    _require(isinstance(rate, (int, float)), f"{owner}: required_rate must be a number")
    _require(rate > 0, f"{owner}: required_rate must be positive, got {rate}")
    return InterestPoint(pid, _as_point(raw["position"], owner), float(rate))


def _parse_agent(raw: dict, index: int) -> Agent:
    _require(isinstance(raw, dict), f"agents[{index}]: expected an object")
    _require("id" in raw, f"agents[{index}]: missing id")
    aid = raw["id"]
    _require(isinstance(aid, int), f"agents[{index}]: id must be an integer")
    owner = f"agent {aid}"
    for key in ("home", "radius", "speed", "max_production", "reachable"):
        _require(key in raw, f"{owner}: missing {key}")
    for key in ("radius", "speed", "max_production"):
        val = raw[key]
        _require(isinstance(val, (int, float)), f"{owner}: {key} must be a number")
        _require(val > 0, f"{owner}: {key} must be positive, got {val}")
    reachable = raw["reachable"]
    _require(
        isinstance(reachable, list) and all(isinstance(r, int) for r in reachable),
        f"{owner}: reachable must be a list of point ids",
    )
    _require(
        len(set(reachable)) == len(reachable),
        f"{owner}: reachable contains duplicate ids",
    )
    return Agent(
        id=aid,
        home=_as_point(raw["home"], owner),
        radius=float(raw["radius"]),
        speed=float(raw["speed"]),
        max_production=float(raw["max_production"]),
        reachable=tuple(reachable),
    )


def scenario_from_dict(raw: dict) -> Scenario:
    _require(isinstance(raw, dict), "scenario: expected a JSON object at top level")
    _require("name" in raw, "scenario: missing name")
    _require("points" in raw and isinstance(raw["points"], list), "scenario: missing points list")
    _require("agents" in raw and isinstance(raw["agents"], list), "scenario: missing agents list")
    _require(len(raw["points"]) > 0, "scenario: needs at least one interest point")
    _require(len(raw["agents"]) > 0, "scenario: needs at least one agent")

    points = [_parse_point(p, i) for i, p in enumerate(raw["points"])]
    agents = [_parse_agent(a, i) for i, a in enumerate(raw["agents"])]

    pids = [p.id for p in points]
    _require(len(set(pids)) == len(pids), "scenario: duplicate point ids")
    aids = [a.id for a in agents]
    _require(len(set(aids)) == len(aids), "scenario: duplicate agent ids")
    known = set(pids)
    for a in agents:
        for r in a.reachable:
            _require(r in known, f"agent {a.id}: reachable point {r} does not exist")

    units = raw.get("units", {})
    _require(
        isinstance(units, dict)
        and all(isinstance(k, str) and isinstance(v, str) for k, v in units.items()),
        "scenario: units must map strings to strings",
    )
    return Scenario(
        name=str(raw["name"]),
        points=sorted(points, key=lambda p: p.id),
        agents=sorted(agents, key=lambda a: a.id),
        units=dict(units),
        description=str(raw.get("description", "")),
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    out: dict = {"name": scenario.name}
    if scenario.description:
        out["description"] = scenario.description
    if scenario.units:
        out["units"] = dict(scenario.units)
    out["points"] = [
        {
            "id": p.id,
            "position": [p.position.x, p.position.y],
            "required_rate": p.required_rate,
        }
        for p in scenario.points
    ]
    out["agents"] = [
        {
            "id": a.id,
            "home": [a.home.x, a.home.y],
            "radius": a.radius,
            "speed": a.speed,
            "max_production": a.max_production,
            "reachable": list(a.reachable),
        }
        for a in scenario.agents
    ]
    return out


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON ({exc})")
    return scenario_from_dict(raw)


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2) + "\n")


@dataclass
class FeasibilityReport:
    feasible: bool
    violations: list[str]
    warnings: list[str]


def necessary_feasibility_check(
    scenario: Scenario,
    normalized_moving_times: dict[int, float] | None = None,
    allow_shared_coverage: bool = False,
) -> FeasibilityReport:
    """Cheap necessary conditions checked before any optimization runs.

    Violations are certificates of infeasibility; a clean report is not a
    guarantee.  normalized_moving_times, when available from tour planning,
    enables the per-agent travel-budget check.
    """
    violations: list[str] = []
    warnings: list[str] = []

    for p in scenario.points:
        reaching = scenario.agents_reaching(p.id)
        if not reaching:
            violations.append(f"point {p.id}: no agent can reach it")
            continue
        combined = sum(a.max_production for a in reaching)
        if combined < p.required_rate:
            violations.append(
                f"point {p.id}: combined max production {combined:g} of reaching "
                f"agents is below the required rate {p.required_rate:g}"
            )
        elif not allow_shared_coverage:
            # at most one unit of hover time lands on the point in total, so
            # the best single producer caps what the point can receive
            best = max(a.max_production for a in reaching)
            if best < p.required_rate:
                violations.append(
                    f"point {p.id}: required rate {p.required_rate:g} exceeds the "
                    f"strongest reaching agent ({best:g}) and hover time at a "
                    "point is capped at one period"
                )

    if normalized_moving_times is not None:
        for a in scenario.agents:
            tm = normalized_moving_times.get(a.id)
            if tm is not None and tm >= 1.0:
                violations.append(
                    f"agent {a.id}: travel consumes the whole period "
                    f"(normalized moving time {tm:.3f} >= 1)"
                )

    warnings.extend(_proximity_warnings(scenario))
    return FeasibilityReport(not violations, violations, warnings)


def _proximity_warnings(scenario: Scenario) -> list[str]:
    """Flag agent pairs whose operating regions force close encounters."""
    notes = []
    sites: dict[int, list[Point2]] = {}
    for a in scenario.agents:
        sites[a.id] = [a.home] + [
            scenario.point_by_id(r).position for r in a.reachable
        ]
    agents = scenario.agents
    for i in range(len(agents)):
        for j in range(i + 1, len(agents)):
            ai, aj = agents[i], agents[j]
            gap = min(
                point_distance(p, q) for p in sites[ai.id] for q in sites[aj.id]
            )
            if gap < ai.radius + aj.radius:
                notes.append(
                    f"agents {ai.id} and {aj.id}: operating regions come within "
                    f"{gap:.1f} of each other (conflict distance "
                    f"{ai.radius + aj.radius:g}); scheduling must separate them"
                )
    return notes
