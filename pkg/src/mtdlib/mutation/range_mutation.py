"""
Random Range Mutation: every interval each AP picks one of its range levels such that all
users stay covered, no AP exceeds its capacity or its energy budget, and no AP repeats a
level it used in the previous ``lookback`` intervals.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union


from mtdlib.constants.defaults import DEFAULT_LOOKBACK, NODE_BUDGET
from mtdlib.scenario import Scenario
from mtdlib.solvers import (
    Clause,
    ExactlyOne,
    Implies,
    LinearLe,
    Literal,
    Model,
    Neq,
    ReifiedEq,
    SearchBudgetExceeded,
    Solution,
    Unsat,
    portfolio_seeds,
    solve_portfolio,
)

from .common import Infeasible, scale_down, scale_up

__all__ = [
    "RnmOptions",
    "RangeSchedule",
    "RnmVariables",
    "StructuralInfeasibility",
    "TimelineSegment",
    "build_rnm_model",
    "decode_range_schedule",
    "diagnose_rnm",
    "schedule_rnm",
    "energy_of",
    "schedule_timeline",
]

LOG = logging.getLogger(__name__)


class StructuralInfeasibility(ValueError):
    """A user that no (AP, range) pair covers; no schedule can exist."""

    def __init__(self, user_id: str):
        self.user_id = user_id
        super().__init__(f"user {user_id} is covered by no AP at any range")


@dataclass(frozen=True)
class RnmOptions:
    lookback: int = DEFAULT_LOOKBACK
    node_budget: int = NODE_BUDGET
    restarts: int = 1


@dataclass(frozen=True)
class RangeSchedule:
    """A range mutation schedule over ``horizon`` intervals.

    ``range_of[i][j]`` is the 0-based range level of AP i in interval j and
    ``assignment[j][k]`` the AP serving user k in interval j (None when unassigned).
    """

    horizon: int
    range_of: Tuple[Tuple[int, ...], ...]
    assignment: Tuple[Tuple[Optional[int], ...], ...]
    energy_used: Tuple[float, ...]

    @property
    def n_aps(self) -> int:
        return len(self.range_of)


@dataclass(frozen=True)
class RnmVariables:
    # range[i][j] -> variable id
    range: Tuple[Tuple[int, ...], ...]
    # (i, j, k) -> variable id, only where AP i can cover user k at some level
    assign: Dict[Tuple[int, int, int], int]


@dataclass(frozen=True)
class TimelineSegment:
    ap: int
    level: int
    radius: float
    start: float
    end: float


def _covering_levels(scenario: Scenario) -> List[List[List[int]]]:
    """``levels[i][k]``: the range levels at which AP i covers user k."""

    levels = [[[] for _ in range(scenario.n_users)] for _ in scenario.aps]
    for i, ap in enumerate(scenario.aps):
        for u, level in enumerate(ap.ranges):
            if level.coverage is None:
                raise ValueError(f"coverage of {ap.id} not derived")
            for k in level.coverage:
                levels[i][k].append(u)

    return levels


def build_rnm_model(
    scenario: Scenario, horizon: int, options: RnmOptions = RnmOptions(), seed: int = 0
) -> Tuple[Model, RnmVariables]:
    """Encodes the range mutation problem over ``horizon`` intervals as a constraint model.

    :param scenario: Scenario with coverage sets present.
    :type scenario: Scenario
    :param horizon: Number of intervals, T.
    :type horizon: integer
    :param options: Lookback depth of the unpredictability constraint and search limits.
    :type options: RnmOptions

    :return: The model and the ids of its range and assignment variables.
    :rtype: tuple
    """

    if horizon < 1:
        raise ValueError("horizon must be positive")

    if options.lookback < 1:
        raise ValueError("lookback must be positive")

    levels = _covering_levels(scenario)
    n_aps = scenario.n_aps
    n_users = scenario.n_users

    for k, user in enumerate(scenario.users):
        if not any(levels[i][k] for i in range(n_aps)):
            raise StructuralInfeasibility(user.id)

    model = Model(rng_seed=seed)

    range_vars = tuple(
        tuple(model.add_variable(range(len(ap.ranges)), f"range[{ap.id},{j}]") for j in range(horizon))
        for ap in scenario.aps
    )

    assign_vars: Dict[Tuple[int, int, int], int] = {}
    for j in range(horizon):
        for i in range(n_aps):
            for k in range(n_users):
                if levels[i][k]:
                    assign_vars[i, j, k] = model.add_bool(f"assign[{i},{j},{k}]")

    for j in range(horizon):
        for k in range(n_users):
            # coverage, implied by the assignment but kept for propagation
            model.add_constraint(
                Clause(tuple(Literal(range_vars[i][j], u) for i in range(n_aps) for u in levels[i][k]))
            )

            candidates = [i for i in range(n_aps) if levels[i][k]]
            model.add_constraint(ExactlyOne(tuple(assign_vars[i, j, k] for i in candidates)))

            for i in candidates:
                model.add_constraint(
                    Implies(assign_vars[i, j, k], tuple(Literal(range_vars[i][j], u) for u in levels[i][k]))
                )

    for i, ap in enumerate(scenario.aps):
        for j in range(horizon):
            for back in range(1, options.lookback + 1):
                if j - back >= 0:
                    model.add_constraint(Neq(range_vars[i][j], range_vars[i][j - back]))

            users = [k for k in range(n_users) if (i, j, k) in assign_vars]
            if len(users) > ap.capacity:
                model.add_constraint(LinearLe(tuple((1, assign_vars[i, j, k]) for k in users), ap.capacity))

    for i, ap in enumerate(scenario.aps):
        _add_energy_budget(model, range_vars[i], ap)

    LOG.debug(
        "range model: %d variables, %d constraints (N=%d, z=%d, T=%d)",
        len(model),
        len(model.constraints),
        n_aps,
        n_users,
        horizon,
    )

    return model, RnmVariables(range_vars, assign_vars)


def _add_energy_budget(model: Model, range_vars, ap) -> None:

    rates = [scale_up(level.energy_rate) for level in ap.ranges]
    budget = scale_down(ap.energy_budget)

    # every interval pays at least the cheapest rate; only the excess needs variables
    base = min(rates)
    bound = budget - base * len(range_vars)

    if (max(rates) - base) * len(range_vars) <= bound:
        return

    terms = []
    for j, var in enumerate(range_vars):
        for u, rate in enumerate(rates):
            if rate > base:
                b = model.add_bool(f"level[{ap.id},{j},{u}]")
                model.add_constraint(ReifiedEq(b, var, u))
                terms.append((rate - base, b))

    model.add_constraint(LinearLe(tuple(terms), bound))


def decode_range_schedule(scenario: Scenario, horizon: int, variables: RnmVariables, solution: Solution) -> RangeSchedule:

    range_of = tuple(tuple(solution[var] for var in row) for row in variables.range)

    assignment = []
    for j in range(horizon):
        row: List[Optional[int]] = [None] * scenario.n_users
        for (i, jj, k), var in variables.assign.items():
            if jj == j and solution[var] == 1:
                row[k] = i
        assignment.append(tuple(row))

    partial = RangeSchedule(horizon, range_of, tuple(assignment), ())

    return RangeSchedule(horizon, range_of, tuple(assignment), tuple(energy_of(scenario, partial)))


def diagnose_rnm(scenario: Scenario, horizon: int, lookback: int = DEFAULT_LOOKBACK) -> Optional[str]:
    """Name of a constraint family that on its own rules out every schedule, if one is
    found by a quick structural check.
    """

    levels = _covering_levels(scenario)

    for k in range(scenario.n_users):
        if not any(levels[i][k] for i in range(scenario.n_aps)):
            return "coverage"

    window = min(lookback, horizon - 1)
    for ap in scenario.aps:
        if len(ap.ranges) <= window:
            return "unpredictability"

    for ap in scenario.aps:
        cheapest = min(scale_up(level.energy_rate) for level in ap.ranges)
        if cheapest * horizon > scale_down(ap.energy_budget):
            return "energy"

    if sum(ap.capacity for ap in scenario.aps) < scenario.n_users:
        return "capacity"

    for i, ap in enumerate(scenario.aps):
        only_here = sum(
            1
            for k in range(scenario.n_users)
            if levels[i][k] and not any(levels[other][k] for other in range(scenario.n_aps) if other != i)
        )
        if only_here > ap.capacity:
            return "capacity"

    return None


def schedule_rnm(
    scenario: Scenario, horizon: int, seed: int, options: RnmOptions = RnmOptions()
) -> Union[RangeSchedule, Infeasible]:
    """Finds a random range mutation schedule.

    :param scenario: Scenario with coverage sets present.
    :type scenario: Scenario
    :param horizon: Number of intervals, T.
    :type horizon: integer
    :param seed: Seed of the randomized search. Equal seeds give equal schedules.
    :type seed: integer
    :param options: Lookback, node budget and number of seeded restarts.
    :type options: RnmOptions

    :return: A schedule, or Infeasible telling a proven contradiction from an exhausted budget.
    :rtype: RangeSchedule or Infeasible
    """

    try:
        model, variables = build_rnm_model(scenario, horizon, options, seed)
    except StructuralInfeasibility as error:
        return Infeasible("unsat", "coverage", str(error))

    seeds = portfolio_seeds(seed, options.restarts)

    try:
        outcome, used = solve_portfolio(model, seeds, options.node_budget)
    except SearchBudgetExceeded as error:
        LOG.info("range mutation: search budget exceeded")
        return Infeasible("budget", nodes=error.nodes)

    if isinstance(outcome, Unsat):
        constraint = diagnose_rnm(scenario, horizon, options.lookback)
        LOG.info("range mutation: unsatisfiable (%s)", constraint)
        return Infeasible("unsat", constraint, nodes=outcome.nodes)

    LOG.info("range mutation: schedule found with seed %d", used)

    return decode_range_schedule(scenario, horizon, variables, outcome)


def _check_shape(scenario: Scenario, schedule: RangeSchedule) -> None:

    if len(schedule.range_of) != scenario.n_aps:
        raise ValueError("schedule shape does not match scenario")

    for ap, row in zip(scenario.aps, schedule.range_of):
        if len(row) != schedule.horizon:
            raise ValueError("schedule shape does not match scenario")
        if any(not 0 <= u < len(ap.ranges) for u in row):
            raise ValueError(f"range level out of bounds for {ap.id}")


def energy_of(scenario: Scenario, schedule: RangeSchedule) -> List[float]:
    """Energy each AP spends over the schedule: the sum of the rates of its chosen levels,
    one interval each.
    """

    _check_shape(scenario, schedule)

    return [
        float(sum(ap.ranges[u].energy_rate for u in row)) for ap, row in zip(scenario.aps, schedule.range_of)
    ]


def schedule_timeline(scenario: Scenario, schedule: RangeSchedule, interval_seconds: float) -> List[TimelineSegment]:
    """Per AP, the run of intervals spent at each range level as (level, radius, start, end)
    segments in seconds. Consecutive intervals at the same level are merged.
    """

    if interval_seconds <= 0:
        raise ValueError("interval length must be positive")

    _check_shape(scenario, schedule)

    segments = []
    for i, (ap, row) in enumerate(zip(scenario.aps, schedule.range_of)):
        start = 0
        for j in range(1, len(row) + 1):
            if j == len(row) or row[j] != row[start]:
                u = row[start]
                segments.append(
                    TimelineSegment(i, u, ap.ranges[u].radius, start * interval_seconds, j * interval_seconds)
                )
                start = j

    return segments
