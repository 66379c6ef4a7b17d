"""
Random Topology Mutation in two phases. The first phase picks a new deployment among the
candidate locations of every AP: all users covered, capacities respected, the AP network
connected, and at least ``delta`` APs relocated. The second phase plans a cell-by-cell
movement from the old deployment to the new one that keeps the network connected at
every step and stays within each AP's energy budget, one unit per move.

Coverage and association use each AP's largest range.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy import ndarray
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from mtdlib.constants.defaults import NODE_BUDGET
from mtdlib.geometry import chebyshev_distance, l2_distance, manhattan_distance, radius_adjacency
from mtdlib.scenario import Cell, GridSpec, Point, Scenario, cell_of, point_of
from mtdlib.solvers import (
    Clause,
    Connected,
    ExactlyOne,
    Implies,
    LinearLe,
    Literal,
    Model,
    ReifiedEq,
    SearchBudgetExceeded,
    Unsat,
    portfolio_seeds,
    solve_portfolio,
)

from .common import Infeasible, greedy_association

__all__ = [
    "Deployment",
    "MovementPlan",
    "RtmOptions",
    "TopologySequence",
    "initial_deployment",
    "candidate_index",
    "grid_neighbors",
    "grid_distance",
    "grid_distances",
    "coverage_at",
    "plan_deployment",
    "plan_movement",
    "plan_topology_sequence",
]

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class Deployment:
    """AP positions and the user association that goes with them. ``assignment[k]`` is
    the AP serving user k, or None.
    """

    positions: Tuple[Point, ...]
    assignment: Tuple[Optional[int], ...] = ()


@dataclass(frozen=True)
class MovementPlan:
    """``path_of[i][j]`` is the grid cell of AP i at step j, for j in ``range(steps)``."""

    steps: int
    path_of: Tuple[Tuple[Cell, ...], ...]

    @property
    def moves_of(self) -> Tuple[int, ...]:
        return tuple(sum(1 for a, b in zip(path, path[1:]) if a != b) for path in self.path_of)

    def positions_at(self, grid: GridSpec, step: int) -> Tuple[Point, ...]:
        return tuple(point_of(grid, path[step]) for path in self.path_of)


@dataclass(frozen=True)
class RtmOptions:
    node_budget: int = NODE_BUDGET
    restarts: int = 1


@dataclass(frozen=True)
class TopologySequence:
    """Deployments ``deployments[0]`` (the starting one) to ``deployments[-1]`` and the
    movement plans between consecutive ones.
    """

    deployments: Tuple[Deployment, ...]
    plans: Tuple[MovementPlan, ...] = field(default=())


def coverage_at(scenario: Scenario, positions: Sequence[Point]) -> ndarray:
    """Coverage matrix - shape (N, z) - of APs at ``positions`` using their largest range."""

    radii = np.array([ap.max_radius for ap in scenario.aps])
    D = l2_distance(np.asarray(positions, dtype=float).reshape(-1, 2), scenario.user_positions())

    return (D <= radii[:, np.newaxis]) & (radii[:, np.newaxis] > 0)


def initial_deployment(scenario: Scenario) -> Deployment:
    """The scenario's own AP positions, users on the nearest covering AP with spare capacity."""

    positions = tuple(ap.position for ap in scenario.aps)
    if any(p is None for p in positions):
        raise ValueError("every AP needs a position")

    covered = coverage_at(scenario, positions)
    distances = l2_distance(scenario.user_positions(), np.asarray(positions, dtype=float))
    assignment = greedy_association(covered, [ap.capacity for ap in scenario.aps], distances)

    return Deployment(positions, tuple(assignment))


def candidate_index(scenario: Scenario, i: int, point: Point) -> Optional[int]:
    """Index of ``point`` among the candidate locations of AP i, or None."""

    for c, candidate in enumerate(scenario.aps[i].candidate_locations):
        if np.allclose(candidate, point):
            return c

    return None


def grid_neighbors(grid: GridSpec, cell: Cell) -> List[Cell]:
    """On-grid cells adjacent to ``cell``: the 4-neighbourhood, or the 8-neighbourhood
    when the grid allows diagonal moves.
    """

    x, y = cell
    if not (0 <= x < grid.width and 0 <= y < grid.height):
        raise ValueError(f"cell {tuple(cell)} is outside the {grid.width}x{grid.height} grid")

    if grid.adjacency == 8:
        offsets = [(dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dx, dy) != (0, 0)]
    else:
        offsets = [(0, -1), (-1, 0), (1, 0), (0, 1)]

    return [
        (x + dx, y + dy) for dx, dy in offsets if 0 <= x + dx < grid.width and 0 <= y + dy < grid.height
    ]


def grid_distances(grid: GridSpec, A: Sequence[Cell], B: Sequence[Cell]) -> ndarray:
    """Fewest moves from every cell of A to every cell of B - shape (N, M)."""

    if grid.adjacency == 8:
        D = chebyshev_distance(A, B)
    else:
        D = manhattan_distance(A, B)

    return np.rint(D).astype(int)


def grid_distance(grid: GridSpec, a: Cell, b: Cell) -> int:
    """Fewest moves between two cells."""
    return int(grid_distances(grid, [a], [b])[0, 0])


def _solve(model: Model, seed: int, options: RtmOptions):

    seeds = portfolio_seeds(seed, options.restarts)

    try:
        outcome, _ = solve_portfolio(model, seeds, options.node_budget)
    except SearchBudgetExceeded as error:
        return Infeasible("budget", nodes=error.nodes)

    return outcome


def plan_deployment(
    scenario: Scenario,
    current: Deployment,
    delta: int,
    seed: int,
    options: RtmOptions = RtmOptions(),
) -> Union[Deployment, Infeasible]:
    """Picks a random new deployment among the candidate locations.

    :param scenario: Scenario whose APs all carry candidate locations.
    :type scenario: Scenario
    :param current: The deployment to move away from.
    :type current: Deployment
    :param delta: Minimum number of APs that must change location.
    :type delta: integer
    :param seed: Seed of the randomized search.
    :type seed: integer

    :return: A new deployment, or Infeasible.
    :rtype: Deployment or Infeasible
    """

    n_aps = scenario.n_aps

    if delta < 0:
        raise ValueError("delta must be nonnegative")

    if delta > n_aps:
        raise ValueError("delta exceeds AP count")

    if len(current.positions) != n_aps:
        raise ValueError("deployment shape does not match scenario")

    for ap in scenario.aps:
        if not ap.candidate_locations:
            raise ValueError(f"missing candidate locations for {ap.id}")

    candidates = [np.asarray(ap.candidate_locations, dtype=float).reshape(-1, 2) for ap in scenario.aps]
    user_points = scenario.user_positions()

    model = Model(rng_seed=seed)
    position = [model.add_variable(range(len(c)), f"position[{ap.id}]") for ap, c in zip(scenario.aps, candidates)]

    # covers[i][k]: candidates of AP i from which its largest range reaches user k
    covers = []
    for ap, c in zip(scenario.aps, candidates):
        D = l2_distance(c, user_points)
        reach = (D <= ap.max_radius) & (ap.max_radius > 0)
        covers.append([list(np.flatnonzero(reach[:, k])) for k in range(scenario.n_users)])

    assign: Dict[Tuple[int, int], int] = {}
    for k, user in enumerate(scenario.users):
        serving = [i for i in range(n_aps) if covers[i][k]]
        if not serving:
            return Infeasible("unsat", "deployment-coverage", f"no candidate location reaches {user.id}")
        for i in serving:
            assign[i, k] = model.add_bool(f"assign[{i},{k}]")
            model.add_constraint(Implies(assign[i, k], tuple(Literal(position[i], int(c)) for c in covers[i][k])))
        model.add_constraint(ExactlyOne(tuple(assign[i, k] for i in serving)))

    for i, ap in enumerate(scenario.aps):
        users = [k for k in range(scenario.n_users) if (i, k) in assign]
        if len(users) > ap.capacity:
            model.add_constraint(LinearLe(tuple((1, assign[i, k]) for k in users), ap.capacity))

    if delta > 0:
        stays = []
        for i in range(n_aps):
            c = candidate_index(scenario, i, current.positions[i])
            if c is not None:
                b = model.add_bool(f"stay[{i}]")
                model.add_constraint(ReifiedEq(b, position[i], c))
                stays.append((1, b))
        model.add_constraint(LinearLe(tuple(stays), n_aps - delta))

    links = [[None] * n_aps for _ in range(n_aps)]
    for i in range(n_aps):
        for j in range(n_aps):
            if i != j:
                links[i][j] = l2_distance(candidates[i], candidates[j]) <= scenario.comm_radius

    model.add_constraint(Connected(tuple(position), lambda i, a, j, b: bool(links[i][j][a, b])))

    outcome = _solve(model, seed, options)

    if isinstance(outcome, Infeasible):
        LOG.info("deployment: search budget exceeded")
        return outcome

    if isinstance(outcome, Unsat):
        constraint = "deployment-delta" if all(len(c) == 1 for c in candidates) and delta > 0 else None
        LOG.info("deployment: unsatisfiable")
        return Infeasible("unsat", constraint, nodes=outcome.nodes)

    positions = tuple(
        (float(candidates[i][outcome[position[i]], 0]), float(candidates[i][outcome[position[i]], 1]))
        for i in range(n_aps)
    )

    assignment: List[Optional[int]] = [None] * scenario.n_users
    for (i, k), var in assign.items():
        if outcome[var] == 1:
            assignment[k] = i

    moved = sum(1 for a, b in zip(current.positions, positions) if not np.allclose(a, b))
    LOG.info("deployment: %d of %d APs relocated", moved, n_aps)

    return Deployment(positions, tuple(assignment))


def _cell_id(grid: GridSpec, cell: Cell) -> int:
    return cell[1] * grid.width + cell[0]


def _cell_at(grid: GridSpec, cell_id: int) -> Cell:
    return (cell_id % grid.width, cell_id // grid.width)


def _disconnected(points: ndarray, comm_radius: float) -> bool:

    if len(points) <= 1:
        return False

    n_components, _ = connected_components(csr_matrix(radius_adjacency(points, comm_radius)), directed=False)

    return n_components > 1


def plan_movement(
    scenario: Scenario,
    start: Deployment,
    end: Deployment,
    max_steps: int,
    seed: int,
    options: RtmOptions = RtmOptions(),
) -> Union[MovementPlan, Infeasible]:
    """Plans the movement of every AP from ``start`` to ``end`` over ``max_steps`` steps,
    the first step at ``start`` and the last at ``end``. Between steps an AP stays or moves
    to a neighbouring cell; the network is connected at every step. Coverage is not
    required while moving.

    :param scenario: Scenario with a grid.
    :type scenario: Scenario
    :param start: Deployment at the first step.
    :type start: Deployment
    :param end: Deployment at the last step.
    :type end: Deployment
    :param max_steps: Number of steps b, endpoints included.
    :type max_steps: integer
    :param seed: Seed of the randomized search.
    :type seed: integer

    :return: A movement plan, or Infeasible.
    :rtype: MovementPlan or Infeasible
    """

    grid = scenario.grid
    if grid is None:
        raise ValueError("scenario has no grid")

    if max_steps < 1:
        raise ValueError("max steps must be positive")

    n_aps = scenario.n_aps
    if len(start.positions) != n_aps or len(end.positions) != n_aps:
        raise ValueError("deployment shape does not match scenario")

    sources = [cell_of(grid, p) for p in start.positions]
    targets = [cell_of(grid, p) for p in end.positions]
    b = max_steps

    for ap, s, t in zip(scenario.aps, sources, targets):
        needed = grid_distance(grid, s, t)
        if needed > b - 1:
            return Infeasible("unsat", "step-budget", f"{ap.id} needs {needed} moves in {b - 1} transitions")
        if needed > np.floor(ap.energy_budget + 1e-9):
            return Infeasible("unsat", "movement-energy", f"{ap.id} needs {needed} moves")

    if _disconnected(np.array(start.positions, dtype=float), scenario.comm_radius) or _disconnected(
        np.array(end.positions, dtype=float), scenario.comm_radius
    ):
        return Infeasible("unsat", "step-connectivity", "an endpoint deployment is disconnected")

    all_cells = [(x, y) for y in range(grid.height) for x in range(grid.width)]

    model = Model(rng_seed=seed)
    path = []
    for i, ap in enumerate(scenario.aps):
        from_source = grid_distances(grid, [sources[i]], all_cells)[0]
        to_target = grid_distances(grid, all_cells, [targets[i]])[:, 0]
        row = []
        for j in range(b):
            domain = [
                _cell_id(grid, c)
                for c, there, back in zip(all_cells, from_source, to_target)
                if there <= j and back <= b - 1 - j
            ]
            row.append(model.add_variable(domain, f"cell[{ap.id},{j}]"))
        path.append(row)

    for i, ap in enumerate(scenario.aps):
        moves = []
        for j in range(b - 1):
            here, there = path[i][j], path[i][j + 1]
            reachable = set(model.domains[there])
            moved = model.add_bool(f"moved[{ap.id},{j}]")
            moves.append((1, moved))
            for c in model.domains[here]:
                cell = _cell_at(grid, c)
                options_next = [c] + [_cell_id(grid, n) for n in grid_neighbors(grid, cell)]
                model.add_constraint(
                    Clause(
                        (Literal(here, c, equal=False),)
                        + tuple(Literal(there, n) for n in options_next if n in reachable)
                    )
                )
                # moved == 1 exactly when the cell changes
                model.add_constraint(
                    Clause((Literal(moved, 1), Literal(here, c, equal=False), Literal(there, c)))
                )
                model.add_constraint(
                    Clause((Literal(moved, 0), Literal(here, c, equal=False), Literal(there, c, equal=False)))
                )

        budget = int(np.floor(ap.energy_budget + 1e-9))
        if budget < b - 1:
            model.add_constraint(LinearLe(tuple(moves), budget))

    size = grid.cell_size
    radius = scenario.comm_radius

    def linked(i, a, j, c):
        ax, ay = _cell_at(grid, a)
        cx, cy = _cell_at(grid, c)
        return float(np.hypot(ax - cx, ay - cy)) * size <= radius

    for j in range(b):
        model.add_constraint(Connected(tuple(path[i][j] for i in range(n_aps)), linked))

    outcome = _solve(model, seed, options)

    if isinstance(outcome, Infeasible):
        LOG.info("movement: search budget exceeded")
        return outcome

    if isinstance(outcome, Unsat):
        LOG.info("movement: unsatisfiable")
        return Infeasible(
            "unsat", detail="no connected movement within the step and energy budgets", nodes=outcome.nodes
        )

    plan = MovementPlan(b, tuple(tuple(_cell_at(grid, outcome[var]) for var in row) for row in path))
    LOG.info("movement: %d moves over %d steps", sum(plan.moves_of), b)

    return plan


def plan_topology_sequence(
    scenario: Scenario,
    periods: int,
    delta: int,
    max_steps: int,
    seed: int,
    current: Optional[Deployment] = None,
    options: RtmOptions = RtmOptions(),
) -> Union[TopologySequence, Infeasible]:
    """Chains ``periods`` topology mutations, each starting from the previous deployment,
    and plans the movement between consecutive deployments. Period seeds are spawned
    from ``seed``.
    """

    if periods < 1:
        raise ValueError("periods must be positive")

    if current is None:
        current = initial_deployment(scenario)

    period_seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(periods, dtype=np.uint64)]

    deployments = [current]
    plans = []
    for period, period_seed in enumerate(period_seeds):
        deployment = plan_deployment(scenario, deployments[-1], delta, period_seed, options)
        if isinstance(deployment, Infeasible):
            LOG.info("topology sequence stopped at period %d", period)
            return deployment

        plan = plan_movement(scenario, deployments[-1], deployment, max_steps, period_seed, options)
        if isinstance(plan, Infeasible):
            LOG.info("topology sequence stopped at period %d", period)
            return plan

        deployments.append(deployment)
        plans.append(plan)

    return TopologySequence(tuple(deployments), tuple(plans))
