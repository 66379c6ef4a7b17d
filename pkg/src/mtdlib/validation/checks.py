"""
Solver-free checks of range schedules, deployments and movement plans. Every violated
instance is reported, ordered by constraint name and then indices.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from mtdlib.constants.defaults import DEFAULT_LOOKBACK
from mtdlib.geometry import l2_distance
from mtdlib.scenario import Scenario, cell_of

__all__ = [
    "Violation",
    "VIOLATION_NAMES",
    "check_range_schedule",
    "check_deployment",
    "check_movement",
    "unreachable_from_root",
]

VIOLATION_NAMES = (
    "energy",
    "coverage",
    "unpredictability",
    "assignment-exactly-one",
    "assignment-in-range",
    "capacity",
    "deployment-coverage",
    "deployment-delta",
    "connectivity",
    "step-endpoints",
    "step-adjacency",
    "movement-energy",
    "step-connectivity",
)

# tolerance for real-valued energy sums
EPS = 1e-9


@dataclass(frozen=True)
class Violation:
    name: str
    i: Optional[int] = None
    j: Optional[int] = None
    k: Optional[int] = None
    detail: str = ""

    def __post_init__(self):
        if self.name not in VIOLATION_NAMES:
            raise ValueError(f"unknown constraint name {self.name}")

    def sort_key(self):
        return (
            self.name,
            -1 if self.i is None else self.i,
            -1 if self.j is None else self.j,
            -1 if self.k is None else self.k,
        )


def _ordered(violations: List[Violation]) -> List[Violation]:
    return sorted(violations, key=Violation.sort_key)


def unreachable_from_root(points, comm_radius: float) -> List[int]:
    """APs that a traversal from AP 0 over the comm-radius graph does not reach."""

    points = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(points)
    if n <= 1:
        return []

    adjacency = l2_distance(points, points) <= comm_radius
    np.fill_diagonal(adjacency, False)
    reached = breadth_first_order(csr_matrix(adjacency), 0, directed=False, return_predecessors=False)

    return sorted(set(range(n)) - set(int(i) for i in reached))


def check_range_schedule(scenario: Scenario, schedule, lookback: int = DEFAULT_LOOKBACK) -> List[Violation]:
    """Checks a range schedule against energy, coverage, unpredictability, assignment and
    capacity rules.

    :param scenario: Scenario with coverage sets present.
    :type scenario: Scenario
    :param schedule: The schedule to check.
    :type schedule: RangeSchedule
    :param lookback: Number of previous intervals whose levels may not be repeated.
    :type lookback: integer

    :return: All violations, empty when the schedule is valid.
    :rtype: list of Violation
    """

    n_aps = scenario.n_aps
    n_users = scenario.n_users
    T = schedule.horizon

    if len(schedule.range_of) != n_aps or len(schedule.assignment) != T:
        raise ValueError("schedule shape does not match scenario")

    for ap, row in zip(scenario.aps, schedule.range_of):
        if len(row) != T:
            raise ValueError("schedule shape does not match scenario")
        if any(not 0 <= u < len(ap.ranges) for u in row):
            raise ValueError(f"range level out of bounds for {ap.id}")

    for row in schedule.assignment:
        if len(row) != n_users:
            raise ValueError("schedule shape does not match scenario")
        if any(i is not None and not 0 <= i < n_aps for i in row):
            raise ValueError("assignment references unknown AP")

    violations = []

    for i, (ap, row) in enumerate(zip(scenario.aps, schedule.range_of)):
        used = sum(ap.ranges[u].energy_rate for u in row)
        if used > ap.energy_budget + EPS:
            violations.append(Violation("energy", i=i, detail=f"{used:g} > {ap.energy_budget:g}"))

        for j in range(T):
            for back in range(1, lookback + 1):
                if j - back >= 0 and row[j] == row[j - back]:
                    violations.append(
                        Violation("unpredictability", i=i, j=j - back, detail=f"level repeated at interval {j}")
                    )

    for j in range(T):
        covered_now = [scenario.aps[i].ranges[schedule.range_of[i][j]].coverage for i in range(n_aps)]
        load = np.zeros(n_aps, dtype=int)

        for k in range(n_users):
            if not any(k in covered for covered in covered_now):
                violations.append(Violation("coverage", j=j, k=k))

            i = schedule.assignment[j][k]
            if i is None:
                violations.append(Violation("assignment-exactly-one", j=j, k=k))
                continue

            load[i] += 1
            if k not in covered_now[i]:
                violations.append(Violation("assignment-in-range", i=i, j=j, k=k))

        for i, ap in enumerate(scenario.aps):
            if load[i] > ap.capacity:
                violations.append(Violation("capacity", i=i, j=j, detail=f"{load[i]} > {ap.capacity}"))

    return _ordered(violations)


def check_deployment(scenario: Scenario, old, new, delta: int) -> List[Violation]:
    """Checks a new deployment: coverage at the largest range, association, capacity,
    relocation count and connectivity from the root AP.
    """

    n_aps = scenario.n_aps
    n_users = scenario.n_users

    if delta < 0:
        raise ValueError("delta must be nonnegative")

    if len(old.positions) != n_aps or len(new.positions) != n_aps or len(new.assignment) != n_users:
        raise ValueError("deployment shape does not match scenario")

    for ap, p in zip(scenario.aps, new.positions):
        if ap.candidate_locations and not any(np.allclose(c, p) for c in ap.candidate_locations):
            raise ValueError(f"position of {ap.id} is not a candidate location")

    positions = np.asarray(new.positions, dtype=float).reshape(-1, 2)
    radii = np.array([ap.max_radius for ap in scenario.aps])
    D = l2_distance(positions, scenario.user_positions())
    reach = (D <= radii[:, np.newaxis]) & (radii[:, np.newaxis] > 0)

    violations = []

    load = np.zeros(n_aps, dtype=int)
    for k in range(n_users):
        if not reach[:, k].any():
            violations.append(Violation("deployment-coverage", k=k))

        i = new.assignment[k]
        if i is None:
            violations.append(Violation("assignment-exactly-one", k=k))
            continue

        if not 0 <= i < n_aps:
            raise ValueError("assignment references unknown AP")

        load[i] += 1
        if not reach[i, k]:
            violations.append(Violation("assignment-in-range", i=i, k=k))

    for i, ap in enumerate(scenario.aps):
        if load[i] > ap.capacity:
            violations.append(Violation("capacity", i=i, detail=f"{load[i]} > {ap.capacity}"))

    moved = sum(1 for a, b in zip(old.positions, new.positions) if not np.allclose(a, b))
    if moved < delta:
        violations.append(Violation("deployment-delta", detail=f"{moved} moved, {delta} required"))

    for i in unreachable_from_root(positions, scenario.comm_radius):
        violations.append(Violation("connectivity", i=i))

    return _ordered(violations)


def check_movement(scenario: Scenario, plan, start, end) -> List[Violation]:
    """Checks a movement plan: endpoints, single-cell steps, per-AP move budget and
    connectivity at every step.
    """

    grid = scenario.grid
    if grid is None:
        raise ValueError("scenario has no grid")

    n_aps = scenario.n_aps
    b = plan.steps

    if b < 1 or len(plan.path_of) != n_aps or any(len(path) != b for path in plan.path_of):
        raise ValueError("plan shape does not match scenario")

    if len(start.positions) != n_aps or len(end.positions) != n_aps:
        raise ValueError("deployment shape does not match scenario")

    for path in plan.path_of:
        for x, y in path:
            if not (0 <= x < grid.width and 0 <= y < grid.height):
                raise ValueError(f"cell {(x, y)} is outside the {grid.width}x{grid.height} grid")

    violations = []

    for i, (ap, path) in enumerate(zip(scenario.aps, plan.path_of)):
        if tuple(path[0]) != cell_of(grid, start.positions[i]):
            violations.append(Violation("step-endpoints", i=i, j=0))
        if tuple(path[-1]) != cell_of(grid, end.positions[i]):
            violations.append(Violation("step-endpoints", i=i, j=b - 1))

        moves = 0
        for j in range(b - 1):
            dx = abs(path[j + 1][0] - path[j][0])
            dy = abs(path[j + 1][1] - path[j][1])
            if dx == 0 and dy == 0:
                continue
            moves += 1
            step = max(dx, dy) if grid.adjacency == 8 else dx + dy
            if step != 1:
                violations.append(Violation("step-adjacency", i=i, j=j, detail=f"{path[j]} -> {path[j + 1]}"))

        if moves > ap.energy_budget + EPS:
            violations.append(Violation("movement-energy", i=i, detail=f"{moves} > {ap.energy_budget:g}"))

    for j in range(b):
        points = np.array([path[j] for path in plan.path_of], dtype=float) * grid.cell_size
        for i in unreachable_from_root(points, scenario.comm_radius):
            violations.append(Violation("step-connectivity", i=i, j=j))

    return _ordered(violations)
