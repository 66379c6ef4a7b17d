"""
Interval-by-interval simulation of attackers that eavesdrop on, or jam, one AP each per
interval, against a static or mutating network configuration.
"""

import logging
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy import ndarray

from mtdlib.constants.defaults import HANDOFF_COST
from mtdlib.geometry import l2_distance
from mtdlib.mutation import (
    Deployment,
    MovementPlan,
    RangeSchedule,
    coverage_at,
    greedy_association,
)
from mtdlib.scenario import Point, Scenario, coverage_table

__all__ = [
    "MODES",
    "STRATEGIES",
    "Attacker",
    "AdversaryConfig",
    "IntervalConfig",
    "IntervalTrace",
    "MetricsReport",
    "static_configuration",
    "range_configurations",
    "topology_configurations",
    "reference_adversary",
    "simulate",
]

LOG = logging.getLogger(__name__)

MODES = ("eavesdrop", "jam")
STRATEGIES = ("static-target", "random-retarget", "sticky-until-loss")


@dataclass(frozen=True)
class Attacker:
    position: Point
    sense_radius: float = 0.0
    mode: str = "eavesdrop"
    strategy: str = "static-target"

    def __post_init__(self):
        if self.sense_radius < 0:
            raise ValueError("sense radius must be nonnegative")
        if self.mode not in MODES:
            raise ValueError(f"unknown attack mode {self.mode}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown attack strategy {self.strategy}")


@dataclass(frozen=True)
class AdversaryConfig:
    """Independent attackers, each able to attack one AP per interval."""

    attackers: Tuple[Attacker, ...] = ()


@dataclass(frozen=True)
class IntervalConfig:
    """Network state during one interval: AP positions and active radii, the users each AP
    covers, and the scheduled user association.
    """

    positions: Tuple[Point, ...]
    radii: Tuple[float, ...]
    coverage: Tuple[FrozenSet[int], ...]
    assignment: Tuple[Optional[int], ...]


@dataclass(frozen=True)
class IntervalTrace:
    interval: int
    # per attacker: targeted AP or None
    targets: Tuple[Optional[int], ...]
    # per attacker: users it compromised
    compromised: Tuple[Tuple[int, ...], ...]
    outages: Tuple[int, ...] = ()


@dataclass(frozen=True)
class MetricsReport:
    compromised_flow_fraction: float
    jam_outage_fraction: float
    handoff_count: int
    throughput_reduction: float
    intervals: int
    n_users: int
    compromised_pairs: int
    handoff_cost: float
    seed: int
    trace: Tuple[IntervalTrace, ...] = ()


def _require_positions(scenario: Scenario) -> None:

    for entity in [*scenario.aps, *scenario.users]:
        if entity.position is None:
            raise ValueError(f"{entity.id} has no position")


def static_configuration(scenario: Scenario) -> IntervalConfig:
    """The network without mutation: every AP at its largest range, users on the nearest
    covering AP with spare capacity.
    """

    _require_positions(scenario)

    positions = tuple(ap.position for ap in scenario.aps)
    coverage = tuple(ap.ranges[-1].coverage for ap in scenario.aps)

    covered = np.array([levels[-1] for levels in coverage_table(scenario)], dtype=bool)
    covered = covered.reshape(scenario.n_aps, scenario.n_users)

    distances = l2_distance(scenario.user_positions(), scenario.ap_positions())
    assignment = greedy_association(covered, [ap.capacity for ap in scenario.aps], distances)

    return IntervalConfig(
        positions,
        tuple(ap.max_radius for ap in scenario.aps),
        coverage,
        tuple(assignment),
    )


def range_configurations(scenario: Scenario, schedule: RangeSchedule) -> List[IntervalConfig]:
    """One configuration per interval of a range mutation schedule."""

    _require_positions(scenario)

    if len(schedule.range_of) != scenario.n_aps:
        raise ValueError("schedule shape does not match scenario")

    positions = tuple(ap.position for ap in scenario.aps)

    configs = []
    for j in range(schedule.horizon):
        levels = [ap.ranges[schedule.range_of[i][j]] for i, ap in enumerate(scenario.aps)]
        configs.append(
            IntervalConfig(
                positions,
                tuple(level.radius for level in levels),
                tuple(level.coverage for level in levels),
                tuple(schedule.assignment[j]),
            )
        )

    return configs


def _deployment_configuration(scenario: Scenario, positions, assignment=None) -> IntervalConfig:

    covered = coverage_at(scenario, positions)
    if assignment is None:
        distances = l2_distance(scenario.user_positions(), np.asarray(positions, dtype=float))
        assignment = greedy_association(covered, [ap.capacity for ap in scenario.aps], distances)

    return IntervalConfig(
        tuple(tuple(p) for p in positions),
        tuple(ap.max_radius for ap in scenario.aps),
        tuple(frozenset(int(k) for k in np.flatnonzero(row)) for row in covered),
        tuple(assignment),
    )


def topology_configurations(
    scenario: Scenario, deployments: Sequence[Deployment], plans: Sequence[MovementPlan] = ()
) -> List[IntervalConfig]:
    """One configuration per deployment, at the largest ranges. With movement plans, the
    intermediate steps between consecutive deployments become intervals too, with users
    re-associated greedily at each step.
    """

    if plans and len(plans) != len(deployments) - 1:
        raise ValueError("expected one movement plan between consecutive deployments")

    configs = []
    for d, deployment in enumerate(deployments):
        assignment = deployment.assignment if deployment.assignment else None
        configs.append(_deployment_configuration(scenario, deployment.positions, assignment))

        if plans and d < len(plans):
            for step in range(1, plans[d].steps - 1):
                configs.append(_deployment_configuration(scenario, plans[d].positions_at(scenario.grid, step)))

    return configs


def reference_adversary() -> AdversaryConfig:
    """Two static-target eavesdroppers for the default lattice scenario, each 6 m from a
    corner AP: inside its largest range and outside every other range in the network.
    """

    return AdversaryConfig(
        (
            Attacker((-6.0, 0.0), 0.0, "eavesdrop", "static-target"),
            Attacker((36.0, 10.0), 0.0, "eavesdrop", "static-target"),
        )
    )


def _in_range(attacker_points: ndarray, config: IntervalConfig, sense: ndarray) -> ndarray:
    """Attackers x APs: True where the attacker's sense disk meets the AP's active coverage disk."""

    radii = np.asarray(config.radii, dtype=float)
    D = l2_distance(attacker_points, np.asarray(config.positions, dtype=float).reshape(-1, 2))

    return (D <= radii[np.newaxis, :] + sense[:, np.newaxis]) & (radii[np.newaxis, :] > 0)


def _as_configurations(scenario: Scenario, source) -> Tuple[List[IntervalConfig], bool]:
    """Configurations and whether they stand for a single repeated state."""

    if isinstance(source, IntervalConfig):
        return [source], True

    if isinstance(source, RangeSchedule):
        return range_configurations(scenario, source), False

    source = list(source)
    if source and isinstance(source[0], Deployment):
        return topology_configurations(scenario, source), False

    return source, False


def simulate(
    scenario: Scenario,
    source: Union[IntervalConfig, RangeSchedule, Sequence[IntervalConfig], Sequence[Deployment]],
    adversary: AdversaryConfig,
    intervals: int,
    handoff_cost: float = HANDOFF_COST,
    seed: int = 0,
    cyclic: bool = True,
) -> MetricsReport:
    """Runs the adversary against a configuration source for ``intervals`` intervals.

    Within an interval, jammers act first: users of a jammed AP move to the nearest covering
    non-jammed AP with spare capacity, or suffer an outage. Eavesdroppers then compromise
    every user served by their target. A user counts as compromised when its serving AP is
    eavesdropped or when it is left without service by a jam. A handoff is a user served, after
    jamming, by a different AP than in the previous interval, or in the first interval by a
    different AP than scheduled.

    :param scenario: Scenario with positions on every AP and user.
    :type scenario: Scenario
    :param source: A static configuration, a range schedule, a deployment sequence or a list of configurations.
    :param adversary: The attackers.
    :type adversary: AdversaryConfig
    :param intervals: Number of intervals to simulate.
    :type intervals: integer
    :param handoff_cost: Fraction of one user-interval of throughput lost per handoff.
    :type handoff_cost: float
    :param seed: Seed of the attackers' random choices.
    :type seed: integer
    :param cyclic: Repeat a shorter source from its start.
    :type cyclic: bool

    :return: Metrics and the per-interval trace.
    :rtype: MetricsReport
    """

    if intervals < 1:
        raise ValueError("intervals must be positive")

    if not 0.0 <= handoff_cost <= 1.0:
        raise ValueError("handoff cost must lie in [0, 1]")

    configs, repeated = _as_configurations(scenario, source)

    if not configs:
        raise ValueError("empty configuration source")

    if len(configs) < intervals and not (cyclic or repeated):
        raise ValueError("configuration covers fewer intervals than requested")

    n_users = scenario.n_users
    capacity = [ap.capacity for ap in scenario.aps]
    user_points = scenario.user_positions()
    attackers = adversary.attackers
    attacker_points = np.array([a.position for a in attackers], dtype=float).reshape(-1, 2)
    sense = np.array([a.sense_radius for a in attackers], dtype=float)

    rng = np.random.default_rng(seed)

    locked: List[Optional[int]] = [None] * len(attackers)
    previous: List[Optional[int]] = [None] * len(attackers)
    serving_before: List[Optional[int]] = [None] * n_users

    compromised_pairs = 0
    outage_pairs = 0
    handoffs = 0
    trace = []

    for j in range(intervals):
        config = configs[j % len(configs)]
        reach = _in_range(attacker_points, config, sense)
        ap_points = np.asarray(config.positions, dtype=float).reshape(-1, 2)

        targets: List[Optional[int]] = []
        for a, attacker in enumerate(attackers):
            sensed = [int(i) for i in np.flatnonzero(reach[a])]
            target = None

            if attacker.strategy == "static-target":
                if locked[a] is None and sensed:
                    D = l2_distance(attacker_points[a : a + 1], ap_points[sensed])[0]
                    locked[a] = sensed[int(np.argmin(D))]
                if locked[a] is not None and locked[a] in sensed:
                    target = locked[a]

            elif attacker.strategy == "sticky-until-loss" and previous[a] in sensed:
                target = previous[a]

            elif sensed:
                target = sensed[int(rng.integers(len(sensed)))]

            previous[a] = target
            targets.append(target)

        jammed = {t for t, attacker in zip(targets, attackers) if t is not None and attacker.mode == "jam"}

        serving = list(config.assignment)
        if j == 0:
            # the first interval starts from its scheduled association
            serving_before = list(serving)

        outages = []
        if jammed:
            load = np.zeros(len(capacity), dtype=int)
            for i in serving:
                if i is not None and i not in jammed:
                    load[i] += 1

            distances = l2_distance(user_points, ap_points)
            for k in range(n_users):
                if serving[k] is None or serving[k] not in jammed:
                    continue
                chosen = None
                for i in np.argsort(distances[k], kind="stable"):
                    i = int(i)
                    if i not in jammed and k in config.coverage[i] and load[i] < capacity[i]:
                        chosen = i
                        break
                if chosen is None:
                    outages.append(k)
                else:
                    load[chosen] += 1
                serving[k] = chosen

        for k in range(n_users):
            if serving[k] is not None and serving_before[k] is not None and serving[k] != serving_before[k]:
                handoffs += 1

        compromised = set(outages)
        per_attacker = []
        for target, attacker in zip(targets, attackers):
            if target is None:
                per_attacker.append(())
            elif attacker.mode == "eavesdrop":
                hit = tuple(k for k in range(n_users) if serving[k] == target)
                compromised.update(hit)
                per_attacker.append(hit)
            else:
                per_attacker.append(tuple(k for k in outages if config.assignment[k] == target))

        compromised_pairs += len(compromised)
        outage_pairs += len(outages)
        trace.append(IntervalTrace(j, tuple(targets), tuple(per_attacker), tuple(outages)))

        LOG.debug("interval %d: targets %s, %d compromised", j, targets, len(compromised))

        serving_before = serving

    pairs = n_users * intervals

    if n_users == 0:
        compromised_fraction = outage_fraction = throughput_reduction = 0.0
    else:
        compromised_fraction = compromised_pairs / pairs
        outage_fraction = outage_pairs / pairs
        throughput_reduction = handoffs * handoff_cost / pairs

    return MetricsReport(
        compromised_flow_fraction=compromised_fraction,
        jam_outage_fraction=outage_fraction,
        handoff_count=handoffs,
        throughput_reduction=throughput_reduction,
        intervals=intervals,
        n_users=n_users,
        compromised_pairs=compromised_pairs,
        handoff_cost=handoff_cost,
        seed=seed,
        trace=tuple(trace),
    )
