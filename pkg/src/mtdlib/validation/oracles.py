"""
Exhaustive enumeration over tiny instances. Candidates are judged by the validator checks
only, so these serve as ground truth for the planners.
"""

import itertools
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from mtdlib.constants.defaults import DEFAULT_LOOKBACK, ENUMERATION_GUARD
from mtdlib.geometry import l2_distance
from mtdlib.mutation import Deployment, RangeSchedule, energy_of
from mtdlib.scenario import Scenario

from .checks import check_deployment, check_range_schedule

__all__ = ["EnumerationResult", "brute_force_rnm", "brute_force_deployment"]

# violations that no association can repair
POSITION_RULES = ("deployment-coverage", "deployment-delta", "connectivity")


@dataclass(frozen=True)
class EnumerationResult:
    count: int
    solutions: Tuple = ()


def brute_force_rnm(
    scenario: Scenario, horizon: int, lookback: int = DEFAULT_LOOKBACK, guard: int = ENUMERATION_GUARD
) -> EnumerationResult:
    """Enumerates every range schedule over ``horizon`` intervals: all range sequences,
    and for each interval every association of users to APs able to cover them at some
    level. Each candidate is kept when :func:`check_range_schedule` reports nothing.
    """

    if horizon < 1:
        raise ValueError("horizon must be positive")

    reachable = []
    for k in range(scenario.n_users):
        reachable.append(
            [i for i, ap in enumerate(scenario.aps) if any(k in level.coverage for level in ap.ranges)]
        )

    if any(not aps for aps in reachable):
        return EnumerationResult(0)

    size = 1
    for ap in scenario.aps:
        size *= len(ap.ranges) ** horizon
    for aps in reachable:
        size *= len(aps) ** horizon

    if size > guard:
        raise ValueError(f"enumeration space of {size} exceeds guard {guard}")

    sequences = [list(itertools.product(range(len(ap.ranges)), repeat=horizon)) for ap in scenario.aps]
    per_interval = list(itertools.product(*reachable))

    solutions = []
    for range_of in itertools.product(*sequences):
        for assignment in itertools.product(per_interval, repeat=horizon):
            candidate = RangeSchedule(horizon, tuple(range_of), tuple(assignment), ())
            if not check_range_schedule(scenario, candidate, lookback):
                energy = tuple(energy_of(scenario, candidate))
                solutions.append(RangeSchedule(horizon, tuple(range_of), tuple(assignment), energy))

    return EnumerationResult(len(solutions), tuple(solutions))


def brute_force_deployment(
    scenario: Scenario, current, delta: int, guard: int = ENUMERATION_GUARD
) -> EnumerationResult:
    """Enumerates every combination of candidate locations and keeps those for which some
    association passes :func:`check_deployment`. Each position tuple counts once, paired
    with the first valid association found.
    """

    for ap in scenario.aps:
        if not ap.candidate_locations:
            raise ValueError(f"missing candidate locations for {ap.id}")

    size = int(np.prod([len(ap.candidate_locations) for ap in scenario.aps]))
    if size > guard:
        raise ValueError(f"enumeration space of {size} exceeds guard {guard}")

    radii = np.array([ap.max_radius for ap in scenario.aps])
    blank = (None,) * scenario.n_users

    solutions = []
    for positions in itertools.product(*(ap.candidate_locations for ap in scenario.aps)):
        positions = tuple(tuple(float(x) for x in p) for p in positions)

        position_level = [
            v for v in check_deployment(scenario, current, Deployment(positions, blank), delta)
            if v.name in POSITION_RULES
        ]
        if position_level:
            continue

        D = l2_distance(np.array(positions), scenario.user_positions())
        reach = (D <= radii[:, np.newaxis]) & (radii[:, np.newaxis] > 0)
        options = [list(np.flatnonzero(reach[:, k])) for k in range(scenario.n_users)]

        found: Optional[Deployment] = None
        for assignment in itertools.product(*options):
            deployment = Deployment(positions, tuple(int(i) for i in assignment))
            if not check_deployment(scenario, current, deployment, delta):
                found = deployment
                break

        if found is not None:
            solutions.append(found)

    return EnumerationResult(len(solutions), tuple(solutions))
