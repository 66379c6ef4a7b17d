"""
Scenario generators: uniform random scenarios for scalability runs, and a regular
lattice used as the reference scenario for security comparisons.
"""

from typing import List, Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree

from mtdlib.constants.defaults import CANDIDATE_REACH, DEFAULT_HORIZON
from mtdlib.geometry import l2_distance

from .scenario import ApSpec, GridSpec, RangeLevel, Scenario, UserSpec, default_energy_rates, derive_coverage

__all__ = ["generate_scenario", "generate_lattice_scenario", "candidate_cells"]


def _ceil3(x):
    return np.ceil(np.asarray(x, dtype=float) * 1000.0 - 1e-9) / 1000.0


def candidate_cells(grid: GridSpec, cell, reach: int) -> List[tuple]:
    """All on-grid cells within Manhattan distance ``reach`` of ``cell``, in row-major order."""

    cx, cy = cell
    cells = []
    for y in range(max(0, cy - reach), min(grid.height, cy + reach + 1)):
        for x in range(max(0, cx - reach), min(grid.width, cx + reach + 1)):
            if abs(x - cx) + abs(y - cy) <= reach:
                cells.append((x, y))

    return cells


def _connecting_radius(points: np.ndarray, floor: float) -> float:
    """Smallest radius that makes the disk graph over ``points`` connected."""

    if len(points) < 2:
        return floor

    D = l2_distance(points, points)
    tree = minimum_spanning_tree(D)

    # coincident points are zero entries, dropped by the sparse tree
    longest = tree.max() if tree.nnz else 0.0

    return float(max(floor, _ceil3(longest)))


def generate_scenario(
    n_aps: int,
    n_users: int,
    width: int,
    height: int,
    n_ranges: int,
    seed: int,
    cell_size: float = 1.0,
    capacity_factor: float = 3.0,
    candidate_reach: int = CANDIDATE_REACH,
    horizon: int = DEFAULT_HORIZON,
) -> Scenario:
    """Generates a random scenario with APs on distinct grid cells and users placed
    uniformly over the grid extent.

    Radii are scaled so that every user lies within the second-largest range of at least
    two APs (of one AP when ``n_aps == 1``); level ``u`` of ``g`` has radius
    ``R * u / (g - 1)``, so an AP alternating between its two largest levels never drops
    a user. Capacities are ``ceil(capacity_factor * z / N)`` and energy budgets allow the
    largest range over the whole horizon.

    :param n_aps: Number of access points, N.
    :type n_aps: integer
    :param n_users: Number of users, z.
    :type n_users: integer
    :param width: Grid width in cells.
    :type width: integer
    :param height: Grid height in cells.
    :type height: integer
    :param n_ranges: Range levels per AP, g.
    :type n_ranges: integer
    :param seed: Seed of the generator; identical arguments give identical scenarios.
    :type seed: integer

    :return: A valid scenario with derived coverage.
    :rtype: Scenario
    """

    if n_aps < 1:
        raise ValueError("at least one AP required")

    if n_users < 0:
        raise ValueError("user count must be nonnegative")

    if width < 1 or height < 1:
        raise ValueError("grid dimensions must be positive")

    if n_aps > width * height:
        raise ValueError("more APs than grid cells")

    if n_ranges < 1:
        raise ValueError("at least one range level required")

    rng = np.random.default_rng(seed)
    grid = GridSpec(width=width, height=height, cell_size=cell_size)

    flat = rng.choice(width * height, size=n_aps, replace=False)
    cells = [(int(idx % width), int(idx // width)) for idx in flat]
    ap_points = np.array(cells, dtype=float) * cell_size

    extent = np.array([width - 1, height - 1], dtype=float) * cell_size
    user_points = np.round(rng.uniform(0.0, 1.0, size=(n_users, 2)) * extent, 3)

    if n_users > 0:
        D = np.sort(l2_distance(user_points, ap_points), axis=1)
        nth = min(1, n_aps - 1)
        reach = float(D[:, nth].max())
    else:
        reach = 0.0

    reach = max(reach, cell_size)

    if n_ranges == 1:
        radii = _ceil3([reach])
    else:
        radii = _ceil3([reach * u / (n_ranges - 1) for u in range(1, n_ranges + 1)])

    rates = default_energy_rates(radii)
    capacity = max(1, int(np.ceil(capacity_factor * n_users / n_aps)))

    aps = []
    for i, cell in enumerate(cells):
        candidates = tuple(
            (float(x * cell_size), float(y * cell_size))
            for x, y in candidate_cells(grid, cell, candidate_reach)
        )
        aps.append(
            ApSpec(
                id=f"ap{i + 1}",
                position=(float(ap_points[i, 0]), float(ap_points[i, 1])),
                ranges=tuple(RangeLevel(float(r), float(f)) for r, f in zip(radii, rates)),
                capacity=capacity,
                energy_budget=float(horizon),
                candidate_locations=candidates,
            )
        )

    users = tuple(
        UserSpec(id=f"u{k + 1}", position=(float(p[0]), float(p[1])))
        for k, p in enumerate(user_points)
    )

    scenario = Scenario(
        aps=tuple(aps),
        users=users,
        horizon_default=horizon,
        comm_radius=_connecting_radius(ap_points, cell_size),
        grid=grid,
    )

    return derive_coverage(scenario)


def generate_lattice_scenario(
    columns: int = 4,
    rows: int = 2,
    spacing: float = 10.0,
    users_per_ap: int = 3,
    radii: Sequence[float] = (3.0, 5.0, 7.0),
    user_offset: float = 2.0,
    capacity: Optional[int] = None,
    horizon: int = DEFAULT_HORIZON,
) -> Scenario:
    """APs on a regular ``columns x rows`` lattice, each with ``users_per_ap`` users on a
    circle of radius ``user_offset`` around it.

    With the defaults (the reference scenario: 8 APs, 24 users, 3 levels) every user is
    covered by its own AP at every level and by no other AP, so the user-AP association is
    fixed and all schedule randomness is in the ranges.
    """

    if columns < 1 or rows < 1:
        raise ValueError("lattice dimensions must be positive")

    if capacity is None:
        capacity = 2 * users_per_ap

    rates = default_energy_rates(radii)
    angles = 2.0 * np.pi * np.arange(users_per_ap) / max(users_per_ap, 1)

    aps = []
    users = []
    for row in range(rows):
        for col in range(columns):
            i = len(aps)
            centre = np.array([col * spacing, row * spacing])
            aps.append(
                ApSpec(
                    id=f"ap{i + 1}",
                    position=(float(centre[0]), float(centre[1])),
                    ranges=tuple(RangeLevel(float(r), float(f)) for r, f in zip(radii, rates)),
                    capacity=capacity,
                    energy_budget=float(horizon),
                )
            )
            for angle in angles:
                p = centre + user_offset * np.array([np.cos(angle), np.sin(angle)])
                users.append(UserSpec(id=f"u{len(users) + 1}", position=(float(p[0]), float(p[1]))))

    scenario = Scenario(
        aps=tuple(aps),
        users=tuple(users),
        horizon_default=horizon,
        comm_radius=spacing,
    )

    return derive_coverage(scenario)
