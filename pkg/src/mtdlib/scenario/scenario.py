"""
Scenario data model: access points, users, range levels and the grid RTM moves on.

All indices are 0-based. Scenario values are frozen once built, so they can be shared
between planners and simulations freely.
"""

import dataclasses
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np
from numpy import ndarray

from mtdlib.constants.defaults import DEFAULT_HORIZON
from mtdlib.geometry import within_radius

__all__ = [
    "Point",
    "Cell",
    "RangeLevel",
    "ApSpec",
    "UserSpec",
    "GridSpec",
    "Scenario",
    "Issue",
    "ScenarioError",
    "ScenarioParseError",
    "derive_coverage",
    "validate_scenario",
    "default_energy_rates",
    "coverage_table",
    "cell_of",
    "point_of",
]

Point = Tuple[float, float]
Cell = Tuple[int, int]


class ScenarioParseError(ValueError):
    """Malformed scenario text: bad JSON, wrong types, missing or unknown keys."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class ScenarioError(ValueError):
    """A scenario that parses but breaks one of the data-model rules."""

    def __init__(self, entity: str, rule: str, detail: str = ""):
        self.entity = entity
        self.rule = rule
        text = f"{entity}: {rule}"
        if detail:
            text += f" ({detail})"
        super().__init__(text)


@dataclass(frozen=True)
class RangeLevel:
    radius: float
    energy_rate: float
    # user indices; None until derived from geometry
    coverage: Optional[FrozenSet[int]] = None
    explicit: bool = False


@dataclass(frozen=True)
class ApSpec:
    id: str
    position: Optional[Point]
    ranges: Tuple[RangeLevel, ...]
    capacity: int
    energy_budget: float
    candidate_locations: Tuple[Point, ...] = ()

    @property
    def max_radius(self) -> float:
        return max(level.radius for level in self.ranges)


@dataclass(frozen=True)
class UserSpec:
    id: str
    position: Optional[Point]


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int
    cell_size: float = 1.0
    # 4 = von Neumann neighbourhood, 8 adds diagonals
    adjacency: int = 4


@dataclass(frozen=True)
class Scenario:
    aps: Tuple[ApSpec, ...]
    users: Tuple[UserSpec, ...] = ()
    horizon_default: int = DEFAULT_HORIZON
    comm_radius: float = 0.0
    grid: Optional[GridSpec] = None
    _user_lookup: Dict[str, int] = field(default=None, init=False, repr=False, compare=False)  # type: ignore

    @property
    def n_aps(self) -> int:
        return len(self.aps)

    @property
    def n_users(self) -> int:
        return len(self.users)

    def ap_index(self, ap_id: str) -> int:
        for i, ap in enumerate(self.aps):
            if ap.id == ap_id:
                return i
        raise KeyError(ap_id)

    def user_index(self, user_id: str) -> int:
        if self._user_lookup is None:
            object.__setattr__(self, "_user_lookup", {u.id: k for k, u in enumerate(self.users)})
        return self._user_lookup[user_id]

    def ap_positions(self) -> ndarray:
        return np.array([ap.position for ap in self.aps], dtype=float).reshape(-1, 2)

    def user_positions(self) -> ndarray:
        return np.array([u.position for u in self.users], dtype=float).reshape(-1, 2)


@dataclass(frozen=True)
class Issue:
    entity: str
    rule: str
    detail: str = ""


def default_energy_rates(radii) -> List[float]:
    """Energy rate proportional to radius squared, scaled so the largest range draws 1.0."""

    radii = np.asarray(radii, dtype=float)
    r_max = radii.max() if radii.size else 0.0

    if r_max <= 0.0:
        return [0.0] * len(radii)

    return list((radii / r_max) ** 2)


def derive_coverage(scenario: Scenario) -> Scenario:
    """Fills in every coverage set that was not given explicitly, using closed disks:
    user k is covered by AP i at level u when its distance to the AP is at most the
    level radius. Explicit coverage sets are left untouched.

    :param scenario: Scenario with positions on every AP and user that needs deriving.
    :type scenario: Scenario

    :return: A new Scenario with all coverage sets present.
    :rtype: Scenario
    """

    needs_geometry = [
        i for i, ap in enumerate(scenario.aps) if any(level.coverage is None for level in ap.ranges)
    ]

    if not needs_geometry:
        return scenario

    for user in scenario.users:
        if user.position is None:
            raise ScenarioError(user.id, "missing position", "needed to derive coverage")

    user_points = scenario.user_positions()
    aps = list(scenario.aps)

    for i in needs_geometry:
        ap = aps[i]
        if ap.position is None:
            raise ScenarioError(ap.id, "missing position", "needed to derive coverage")

        radii = [level.radius for level in ap.ranges]
        covered = within_radius([ap.position] * len(radii), user_points, radii)

        levels = []
        for u, level in enumerate(ap.ranges):
            if level.coverage is None:
                members = frozenset(int(k) for k in np.flatnonzero(covered[u])) if level.radius > 0 else frozenset()
                level = dataclasses.replace(level, coverage=members, explicit=False)
            levels.append(level)

        aps[i] = dataclasses.replace(ap, ranges=tuple(levels))

    return dataclasses.replace(scenario, aps=tuple(aps))


def coverage_table(scenario: Scenario) -> List[ndarray]:
    """Per AP, a boolean matrix of shape (g_i, z) with entry [u, k] set when level u covers user k."""

    table = []
    for ap in scenario.aps:
        matrix = np.zeros((len(ap.ranges), scenario.n_users), dtype=bool)
        for u, level in enumerate(ap.ranges):
            if level.coverage is None:
                raise ValueError(f"coverage of {ap.id} not derived")
            matrix[u, sorted(level.coverage)] = True
        table.append(matrix)

    return table


def cell_of(grid: GridSpec, point: Point) -> Cell:
    """Grid cell of a point lying on the lattice ``cell_size * (x, y)``."""

    scaled = np.asarray(point, dtype=float) / grid.cell_size
    cell = np.rint(scaled)

    if not np.allclose(scaled, cell, atol=1e-9):
        raise ValueError(f"point {tuple(point)} is not on a grid cell")

    cx, cy = int(cell[0]), int(cell[1])
    if not (0 <= cx < grid.width and 0 <= cy < grid.height):
        raise ValueError(f"point {tuple(point)} is outside the {grid.width}x{grid.height} grid")

    return cx, cy


def point_of(grid: GridSpec, cell: Cell) -> Point:
    return (cell[0] * grid.cell_size, cell[1] * grid.cell_size)


def validate_scenario(scenario: Scenario) -> List[Issue]:
    """Checks every data-model rule and returns the issues found, in scenario order.
    An empty list means the scenario is valid.
    """

    issues: List[Issue] = []

    if scenario.n_aps < 1:
        issues.append(Issue("scenario", "at least one AP required"))

    if scenario.horizon_default < 1:
        issues.append(Issue("scenario", "horizon must be positive"))

    if scenario.comm_radius < 0:
        issues.append(Issue("scenario", "comm radius must be nonnegative"))

    if scenario.grid is not None:
        grid = scenario.grid
        if grid.width < 1 or grid.height < 1 or grid.cell_size <= 0:
            issues.append(Issue("grid", "grid dimensions must be positive"))
        if grid.adjacency not in (4, 8):
            issues.append(Issue("grid", "adjacency must be 4 or 8"))

    seen = set()
    for entity in [*scenario.aps, *scenario.users]:
        if entity.id in seen:
            issues.append(Issue(entity.id, "duplicate id"))
        seen.add(entity.id)

    n_users = scenario.n_users

    for ap in scenario.aps:

        if len(ap.ranges) == 0:
            issues.append(Issue(ap.id, "ranges must not be empty"))
            continue

        radii = [level.radius for level in ap.ranges]
        rates = [level.energy_rate for level in ap.ranges]

        if any(r < 0 for r in radii):
            issues.append(Issue(ap.id, "radius must be nonnegative"))

        if any(b <= a for a, b in zip(radii, radii[1:])):
            issues.append(Issue(ap.id, "ranges not strictly increasing", str(radii)))

        if any(rate < 0 for rate in rates):
            issues.append(Issue(ap.id, "energy rate must be nonnegative"))

        if any(b < a for a, b in zip(rates, rates[1:])):
            issues.append(Issue(ap.id, "energy rate must be nondecreasing", str(rates)))

        for u, level in enumerate(ap.ranges):
            if level.coverage is None:
                continue
            if any(k < 0 or k >= n_users for k in level.coverage):
                issues.append(Issue(ap.id, "coverage references unknown user", f"level {u + 1}"))
            if level.radius == 0 and level.coverage:
                issues.append(Issue(ap.id, "zero radius must cover nobody", f"level {u + 1}"))

        if ap.capacity < 1:
            issues.append(Issue(ap.id, "capacity must be positive"))

        if ap.energy_budget < 0:
            issues.append(Issue(ap.id, "energy budget must be nonnegative"))

        if ap.candidate_locations:
            if ap.position is None or not any(
                np.allclose(c, ap.position) for c in ap.candidate_locations
            ):
                issues.append(Issue(ap.id, "candidates must include current position"))

            if scenario.grid is not None:
                for c in ap.candidate_locations:
                    try:
                        cell_of(scenario.grid, c)
                    except ValueError as error:
                        issues.append(Issue(ap.id, "candidate off grid", str(error)))
                        break

    return issues
