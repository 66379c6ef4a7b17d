"""
JSON codecs for scenarios, plans, violations, adversaries and metrics. Identifiers in
files are the scenario's AP and user ids; range levels in schedule files are 1-based.
"""

import json
from pathlib import Path
from typing import IO, Any, Dict, List, Optional, Sequence

import pandas as pd

from mtdlib.adversary import (
    AdversaryConfig,
    AggregateStatistics,
    Attacker,
    ComparisonReport,
    EnsembleComparison,
    MetricsReport,
)
from mtdlib.constants.defaults import DEFAULT_HORIZON
from mtdlib.mutation import Deployment, MovementPlan, RangeSchedule, TimelineSegment, energy_of
from mtdlib.scenario import (
    ApSpec,
    GridSpec,
    RangeLevel,
    Scenario,
    ScenarioError,
    ScenarioParseError,
    UserSpec,
    cell_of,
    default_energy_rates,
    derive_coverage,
    point_of,
    validate_scenario,
)
from mtdlib.validation import Violation

__all__ = [
    "read_json",
    "write_json",
    "load_scenario",
    "read_scenario",
    "dump_scenario",
    "scenario_to_dict",
    "schedule_to_dict",
    "schedule_from_dict",
    "timeline_to_list",
    "deployment_to_dict",
    "deployment_from_dict",
    "plan_to_dict",
    "plan_from_dict",
    "violations_to_list",
    "adversary_from_dict",
    "adversary_to_dict",
    "metrics_to_dict",
    "comparison_to_dict",
    "aggregate_to_dict",
    "ensemble_to_dict",
    "trace_frame",
    "write_frame",
]


def read_json(path) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_json(data: Any, stream: IO[str]) -> None:
    stream.write(json.dumps(data, indent=2))
    stream.write("\n")


def _keys(obj: Any, path: str, required: Sequence[str], optional: Sequence[str] = ()) -> Dict[str, Any]:

    if not isinstance(obj, dict):
        raise ScenarioParseError(path, "expected an object")

    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        raise ScenarioParseError(f"{path}.{unknown[0]}", "unknown key")

    for key in required:
        if key not in obj:
            raise ScenarioParseError(f"{path}.{key}", "missing key")

    return obj


def _number(value: Any, path: str) -> float:

    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioParseError(path, "expected a number")

    return float(value)


def _integer(value: Any, path: str) -> int:

    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioParseError(path, "expected an integer")

    return value


def _string(value: Any, path: str) -> str:

    if not isinstance(value, str):
        raise ScenarioParseError(path, "expected a string")

    return value


def _list(value: Any, path: str) -> list:

    if not isinstance(value, list):
        raise ScenarioParseError(path, "expected a list")

    return value


def _point(value: Any, path: str):

    if not isinstance(value, list) or len(value) != 2:
        raise ScenarioParseError(path, "expected a point [x, y]")

    return (_number(value[0], f"{path}[0]"), _number(value[1], f"{path}[1]"))


def load_scenario(source: IO[str]) -> Scenario:
    """Reads a scenario document, checks it, and derives every coverage set not given
    explicitly.

    :param source: Readable text stream with the JSON document.
    :type source: file-like object

    :return: A valid scenario.
    :rtype: Scenario
    """

    try:
        doc = json.loads(source.read())
    except json.JSONDecodeError as error:
        raise ScenarioParseError("$", f"invalid JSON ({error.msg} at line {error.lineno})") from error

    _keys(doc, "$", ["aps"], ["users", "comm_radius", "grid", "horizon"])

    users = []
    for k, obj in enumerate(_list(doc.get("users", []), "$.users")):
        path = f"$.users[{k}]"
        _keys(obj, path, ["id"], ["pos"])
        position = _point(obj["pos"], f"{path}.pos") if "pos" in obj else None
        users.append(UserSpec(_string(obj["id"], f"{path}.id"), position))

    user_index = {}
    for k, user in enumerate(users):
        user_index.setdefault(user.id, k)

    aps = []
    for i, obj in enumerate(_list(doc["aps"], "$.aps")):
        path = f"$.aps[{i}]"
        _keys(obj, path, ["id", "ranges", "capacity", "energy_budget"], ["pos", "candidates"])
        ap_id = _string(obj["id"], f"{path}.id")

        raw_levels = _list(obj["ranges"], f"{path}.ranges")
        radii = []
        for u, level in enumerate(raw_levels):
            _keys(level, f"{path}.ranges[{u}]", ["radius"], ["energy_rate", "covers"])
            radii.append(_number(level["radius"], f"{path}.ranges[{u}].radius"))

        defaults = default_energy_rates(radii)

        levels = []
        for u, level in enumerate(raw_levels):
            rpath = f"{path}.ranges[{u}]"
            rate = _number(level["energy_rate"], f"{rpath}.energy_rate") if "energy_rate" in level else defaults[u]

            coverage = None
            if "covers" in level:
                members = set()
                for user_id in _list(level["covers"], f"{rpath}.covers"):
                    user_id = _string(user_id, f"{rpath}.covers")
                    if user_id not in user_index:
                        raise ScenarioError(ap_id, "coverage references unknown user", user_id)
                    members.add(user_index[user_id])
                coverage = frozenset(members)

            levels.append(RangeLevel(radii[u], float(rate), coverage, explicit=coverage is not None))

        candidates = tuple(
            _point(p, f"{path}.candidates[{c}]") for c, p in enumerate(_list(obj.get("candidates", []), f"{path}.candidates"))
        )

        aps.append(
            ApSpec(
                id=ap_id,
                position=_point(obj["pos"], f"{path}.pos") if "pos" in obj else None,
                ranges=tuple(levels),
                capacity=_integer(obj["capacity"], f"{path}.capacity"),
                energy_budget=_number(obj["energy_budget"], f"{path}.energy_budget"),
                candidate_locations=candidates,
            )
        )

    grid = None
    if doc.get("grid") is not None:
        obj = _keys(doc["grid"], "$.grid", ["width", "height"], ["cell_size", "adjacency"])
        grid = GridSpec(
            width=_integer(obj["width"], "$.grid.width"),
            height=_integer(obj["height"], "$.grid.height"),
            cell_size=_number(obj.get("cell_size", 1.0), "$.grid.cell_size"),
            adjacency=_integer(obj.get("adjacency", 4), "$.grid.adjacency"),
        )

    scenario = Scenario(
        aps=tuple(aps),
        users=tuple(users),
        horizon_default=_integer(doc.get("horizon", DEFAULT_HORIZON), "$.horizon"),
        comm_radius=_number(doc.get("comm_radius", 0.0), "$.comm_radius"),
        grid=grid,
    )

    issues = validate_scenario(scenario)
    if issues:
        raise ScenarioError(issues[0].entity, issues[0].rule, issues[0].detail)

    return derive_coverage(scenario)


def read_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as f:
        return load_scenario(f)


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """Document form of a scenario. Only explicit coverage sets are written; derived ones
    are recomputed on load.
    """

    def level_dict(level: RangeLevel):
        out: Dict[str, Any] = {"radius": level.radius, "energy_rate": level.energy_rate}
        if level.explicit:
            out["covers"] = [scenario.users[k].id for k in sorted(level.coverage)]
        return out

    aps = []
    for ap in scenario.aps:
        obj: Dict[str, Any] = {"id": ap.id}
        if ap.position is not None:
            obj["pos"] = list(ap.position)
        obj["ranges"] = [level_dict(level) for level in ap.ranges]
        obj["capacity"] = ap.capacity
        obj["energy_budget"] = ap.energy_budget
        if ap.candidate_locations:
            obj["candidates"] = [list(p) for p in ap.candidate_locations]
        aps.append(obj)

    users = []
    for user in scenario.users:
        obj = {"id": user.id}
        if user.position is not None:
            obj["pos"] = list(user.position)
        users.append(obj)

    doc: Dict[str, Any] = {
        "aps": aps,
        "users": users,
        "comm_radius": scenario.comm_radius,
        "horizon": scenario.horizon_default,
    }

    if scenario.grid is not None:
        grid = scenario.grid
        doc["grid"] = {
            "width": grid.width,
            "height": grid.height,
            "cell_size": grid.cell_size,
            "adjacency": grid.adjacency,
        }

    return doc


def dump_scenario(scenario: Scenario, stream: IO[str]) -> None:
    write_json(scenario_to_dict(scenario), stream)


def _ap_lookup(scenario: Scenario, ap_id: Any) -> int:
    try:
        return scenario.ap_index(ap_id)
    except KeyError:
        raise ValueError(f"unknown AP {ap_id}") from None


def _user_lookup(scenario: Scenario, user_id: Any) -> int:
    try:
        return scenario.user_index(user_id)
    except KeyError:
        raise ValueError(f"unknown user {user_id}") from None


def _association_map(scenario: Scenario, assignment: Sequence[Optional[int]]) -> Dict[str, str]:
    return {scenario.users[k].id: scenario.aps[i].id for k, i in enumerate(assignment) if i is not None}


def _association_from_map(scenario: Scenario, obj: Any) -> tuple:

    if not isinstance(obj, dict):
        raise ValueError("expected a user to AP map")

    assignment: List[Optional[int]] = [None] * scenario.n_users
    for user_id, ap_id in obj.items():
        assignment[_user_lookup(scenario, user_id)] = _ap_lookup(scenario, ap_id)

    return tuple(assignment)


def schedule_to_dict(scenario: Scenario, schedule: RangeSchedule) -> Dict[str, Any]:
    return {
        "horizon": schedule.horizon,
        "ranges": [[u + 1 for u in row] for row in schedule.range_of],
        "assignment": [_association_map(scenario, row) for row in schedule.assignment],
        "energy": {ap.id: e for ap, e in zip(scenario.aps, schedule.energy_used)},
    }


def schedule_from_dict(scenario: Scenario, doc: Any) -> RangeSchedule:
    """Reads a schedule document. Shapes and identifiers must match ``scenario``; energy
    totals are recomputed from the ranges.
    """

    if not isinstance(doc, dict) or set(doc) - {"horizon", "ranges", "assignment", "energy"}:
        raise ValueError("malformed schedule document")

    horizon = doc.get("horizon")
    ranges = doc.get("ranges")
    assignment = doc.get("assignment")

    if not isinstance(horizon, int) or not isinstance(ranges, list) or not isinstance(assignment, list):
        raise ValueError("malformed schedule document")

    if len(ranges) != scenario.n_aps or len(assignment) != horizon:
        raise ValueError("schedule shape does not match scenario")

    range_of = []
    for row in ranges:
        if not isinstance(row, list) or len(row) != horizon or not all(isinstance(u, int) for u in row):
            raise ValueError("schedule shape does not match scenario")
        range_of.append(tuple(u - 1 for u in row))

    partial = RangeSchedule(
        horizon,
        tuple(range_of),
        tuple(_association_from_map(scenario, row) for row in assignment),
        (),
    )

    return RangeSchedule(partial.horizon, partial.range_of, partial.assignment, tuple(energy_of(scenario, partial)))


def timeline_to_list(scenario: Scenario, segments: Sequence[TimelineSegment]) -> List[Dict[str, Any]]:
    return [
        {
            "ap": scenario.aps[s.ap].id,
            "range": s.level + 1,
            "radius": s.radius,
            "start": s.start,
            "end": s.end,
        }
        for s in segments
    ]


def deployment_to_dict(scenario: Scenario, deployment: Deployment) -> Dict[str, Any]:
    return {
        "positions": {ap.id: list(p) for ap, p in zip(scenario.aps, deployment.positions)},
        "assignment": _association_map(scenario, deployment.assignment),
    }


def deployment_from_dict(scenario: Scenario, doc: Any) -> Deployment:

    if not isinstance(doc, dict) or "positions" not in doc or set(doc) - {"positions", "assignment"}:
        raise ValueError("malformed deployment document")

    positions = doc["positions"]
    if not isinstance(positions, dict) or set(positions) != {ap.id for ap in scenario.aps}:
        raise ValueError("deployment shape does not match scenario")

    points = [_point(positions[ap.id], f"positions.{ap.id}") for ap in scenario.aps]

    return Deployment(tuple(points), _association_from_map(scenario, doc.get("assignment", {})))


def plan_to_dict(scenario: Scenario, plan: MovementPlan) -> Dict[str, Any]:
    grid = scenario.grid
    return {
        "steps": plan.steps,
        "positions": [
            {ap.id: list(point_of(grid, path[j])) for ap, path in zip(scenario.aps, plan.path_of)}
            for j in range(plan.steps)
        ],
        "moves": {ap.id: m for ap, m in zip(scenario.aps, plan.moves_of)},
    }


def plan_from_dict(scenario: Scenario, doc: Any) -> MovementPlan:

    if scenario.grid is None:
        raise ValueError("scenario has no grid")

    if not isinstance(doc, dict) or set(doc) - {"steps", "positions", "moves"}:
        raise ValueError("malformed plan document")

    steps = doc.get("steps")
    rows = doc.get("positions")
    if not isinstance(steps, int) or not isinstance(rows, list) or len(rows) != steps:
        raise ValueError("plan shape does not match scenario")

    ids = {ap.id for ap in scenario.aps}
    paths: List[List] = [[] for _ in scenario.aps]
    for j, row in enumerate(rows):
        if not isinstance(row, dict) or set(row) != ids:
            raise ValueError("plan shape does not match scenario")
        for i, ap in enumerate(scenario.aps):
            paths[i].append(cell_of(scenario.grid, _point(row[ap.id], f"positions[{j}].{ap.id}")))

    return MovementPlan(steps, tuple(tuple(path) for path in paths))


def violations_to_list(violations: Sequence[Violation]) -> List[Dict[str, Any]]:
    return [{"name": v.name, "i": v.i, "j": v.j, "k": v.k, "detail": v.detail} for v in violations]


def adversary_from_dict(doc: Any) -> AdversaryConfig:

    _keys(doc, "$", ["attackers"])

    attackers = []
    for a, obj in enumerate(_list(doc["attackers"], "$.attackers")):
        path = f"$.attackers[{a}]"
        _keys(obj, path, ["pos"], ["sense_radius", "mode", "strategy"])
        attackers.append(
            Attacker(
                position=_point(obj["pos"], f"{path}.pos"),
                sense_radius=_number(obj.get("sense_radius", 0.0), f"{path}.sense_radius"),
                mode=_string(obj.get("mode", "eavesdrop"), f"{path}.mode"),
                strategy=_string(obj.get("strategy", "static-target"), f"{path}.strategy"),
            )
        )

    return AdversaryConfig(tuple(attackers))


def adversary_to_dict(adversary: AdversaryConfig) -> Dict[str, Any]:
    return {
        "attackers": [
            {"pos": list(a.position), "sense_radius": a.sense_radius, "mode": a.mode, "strategy": a.strategy}
            for a in adversary.attackers
        ]
    }


def metrics_to_dict(scenario: Scenario, report: MetricsReport, trace: bool = True) -> Dict[str, Any]:

    doc: Dict[str, Any] = {
        "seed": report.seed,
        "intervals": report.intervals,
        "handoff_cost": report.handoff_cost,
        "compromised_flow_fraction": report.compromised_flow_fraction,
        "jam_outage_fraction": report.jam_outage_fraction,
        "handoff_count": report.handoff_count,
        "throughput_reduction": report.throughput_reduction,
    }

    if trace:
        doc["per_interval_trace"] = [
            {
                "interval": t.interval,
                "targets": [None if i is None else scenario.aps[i].id for i in t.targets],
                "compromised": [[scenario.users[k].id for k in users] for users in t.compromised],
            }
            for t in report.trace
        ]

    return doc


def comparison_to_dict(comparison: ComparisonReport) -> Dict[str, Any]:
    return {
        "baseline": comparison.baseline,
        "mutated": comparison.mutated,
        "reduction": comparison.reduction,
        "undefined": comparison.undefined,
    }


def aggregate_to_dict(aggregate: AggregateStatistics) -> Dict[str, Any]:
    return {
        "seeds": list(aggregate.seeds),
        "summary": {
            name: {"mean": s.mean, "min": s.min, "max": s.max, "stderr": s.stderr}
            for name, s in aggregate.summary.items()
        },
    }


def ensemble_to_dict(comparison: EnsembleComparison) -> Dict[str, Any]:
    return {
        "baseline": aggregate_to_dict(comparison.baseline),
        "mutated": aggregate_to_dict(comparison.mutated),
        "reduction": comparison.reduction,
        "mean_reduction": comparison.mean_reduction,
        "undefined": comparison.reduction is None,
        "seeds_improved": comparison.seeds_improved,
    }


def trace_frame(scenario: Scenario, adversary: AdversaryConfig, report: MetricsReport) -> pd.DataFrame:
    """One row per (interval, attacker): target AP id, mode and the ids of compromised users."""

    rows = []
    for t in report.trace:
        for a, (target, users) in enumerate(zip(t.targets, t.compromised)):
            rows.append(
                {
                    "interval": t.interval,
                    "attacker": a,
                    "target_ap": "" if target is None else scenario.aps[target].id,
                    "mode": adversary.attackers[a].mode,
                    "compromised_users": ";".join(scenario.users[k].id for k in users),
                }
            )

    return pd.DataFrame(rows, columns=["interval", "attacker", "target_ap", "mode", "compromised_users"])


def write_frame(frame: pd.DataFrame, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
