from pathlib import Path

from mtdlib.mutation import Deployment, RangeSchedule
from mtdlib.scenario import ApSpec, GridSpec, RangeLevel, Scenario, UserSpec, derive_coverage
from mtdlib.scenario.generate import candidate_cells
from mtdlib.utils.json_format import read_scenario

ASSETS = Path(__file__).resolve().parent / "assets"


def get_scenario(name: str) -> Scenario:
    """Scenario from a JSON file in the assets folder."""
    return read_scenario(ASSETS / name)


def get_s0_witness() -> RangeSchedule:
    """Valid schedule over two intervals for s0.json and s0_geometric.json. Both users sit
    on ap1 in the first interval and on ap2 in the second.
    """

    return RangeSchedule(
        horizon=2,
        range_of=((1, 0), (0, 1)),
        assignment=((0, 0), (1, 1)),
        energy_used=(3.0, 3.0),
    )


def get_g1(delta_candidates: bool = True, adjacency: int = 4) -> Scenario:
    """Three APs in a row on a 5x5 grid and four users on the midpoints of the grid edges.

    With ``delta_candidates`` every AP may go to any cell within two grid steps, otherwise
    its only candidate is where it stands.
    """

    grid = GridSpec(width=5, height=5, cell_size=1.0, adjacency=adjacency)

    cells = [(1, 2), (2, 2), (3, 2)]
    aps = []
    for i, cell in enumerate(cells):
        if delta_candidates:
            candidates = tuple((float(x), float(y)) for x, y in candidate_cells(grid, cell, 2))
        else:
            candidates = ((float(cell[0]), float(cell[1])),)
        aps.append(
            ApSpec(
                id=f"ap{i + 1}",
                position=(float(cell[0]), float(cell[1])),
                ranges=(RangeLevel(1.0, 0.25), RangeLevel(2.0, 1.0)),
                capacity=2,
                energy_budget=4.0,
                candidate_locations=candidates,
            )
        )

    users = (
        UserSpec("u1", (2.0, 0.0)),
        UserSpec("u2", (0.0, 2.0)),
        UserSpec("u3", (4.0, 2.0)),
        UserSpec("u4", (2.0, 4.0)),
    )

    return derive_coverage(Scenario(aps=tuple(aps), users=users, comm_radius=1.5, grid=grid))


def get_g1_witness() -> Deployment:
    """ap1 one cell down, ap2 in place, ap3 one cell up; u1 and u2 on ap1, u3 and u4 on ap3."""
    return Deployment(((1.0, 1.0), (2.0, 2.0), (3.0, 3.0)), (0, 0, 2, 2))
