"""
Every plan the planners return on generated scenarios must pass the independent
validators. Outcomes that are infeasible or out of budget are allowed, wrong plans are not.
"""

import numpy as np

from mtdlib.mutation import (
    Infeasible,
    RnmOptions,
    RtmOptions,
    initial_deployment,
    plan_deployment,
    plan_movement,
    schedule_rnm,
)
from mtdlib.scenario import generate_scenario
from mtdlib.validation import check_deployment, check_movement, check_range_schedule

N_SCENARIOS = 200

# keep unlucky instances cheap
BUDGET = 20000


def random_scenarios(n, seed=2024):

    rng = np.random.default_rng(seed)

    for s in range(n):
        n_aps = int(rng.integers(1, 11))
        n_users = int(rng.integers(0, 31))
        width = int(rng.integers(4, 9))
        height = int(rng.integers(4, 9))
        n_ranges = int(rng.integers(1, 4))
        horizon = int(rng.integers(1, 7))
        yield s, horizon, generate_scenario(n_aps, n_users, width, height, n_ranges, seed=s, horizon=horizon)


def test_range_schedules_are_valid():

    solved = 0
    for s, horizon, scenario in random_scenarios(N_SCENARIOS):
        schedule = schedule_rnm(scenario, horizon, seed=s, options=RnmOptions(node_budget=BUDGET))

        if isinstance(schedule, Infeasible):
            continue

        solved += 1
        assert check_range_schedule(scenario, schedule) == [], f"scenario {s}"

        for row in schedule.range_of:
            assert all(a != b for a, b in zip(row, row[1:])), f"scenario {s}"

    # a single range level cannot alternate over several intervals
    assert solved >= N_SCENARIOS // 2


def test_lookback_two_schedules():

    options = RnmOptions(lookback=2, node_budget=BUDGET)

    for s, horizon, scenario in random_scenarios(50, seed=7):
        schedule = schedule_rnm(scenario, horizon, seed=s, options=options)

        if isinstance(schedule, Infeasible):
            continue

        assert check_range_schedule(scenario, schedule, lookback=2) == [], f"scenario {s}"

        for row in schedule.range_of:
            for j in range(len(row) - 2):
                assert len(set(row[j : j + 3])) == 3, f"scenario {s}"


def test_topology_plans_are_valid():

    options = RtmOptions(node_budget=BUDGET)

    for s, _, scenario in random_scenarios(40, seed=11):
        current = initial_deployment(scenario)

        deployment = plan_deployment(scenario, current, 1, seed=s, options=options)
        if isinstance(deployment, Infeasible):
            continue

        assert check_deployment(scenario, current, deployment, 1) == [], f"scenario {s}"

        plan = plan_movement(scenario, current, deployment, 5, seed=s, options=options)
        if isinstance(plan, Infeasible):
            continue

        assert check_movement(scenario, plan, current, deployment) == [], f"scenario {s}"

        for i, path in enumerate(plan.path_of):
            moves = plan.moves_of[i]
            shortest = abs(path[0][0] - path[-1][0]) + abs(path[0][1] - path[-1][1])
            assert shortest <= moves <= min(scenario.aps[i].energy_budget, plan.steps - 1)


def test_desk_scale_instance():

    scenario = generate_scenario(50, 200, 20, 20, 3, seed=1)

    outcome = schedule_rnm(scenario, 10, seed=1)

    assert not (isinstance(outcome, Infeasible) and outcome.reason == "budget")

    if not isinstance(outcome, Infeasible):
        assert check_range_schedule(scenario, outcome) == []


if __name__ == "__main__":
    test_range_schedules_are_valid()
    test_topology_plans_are_valid()
