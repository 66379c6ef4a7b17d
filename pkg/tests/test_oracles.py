import io
import itertools
import json

import pytest
from conftest import get_g1, get_g1_witness, get_s0_witness, get_scenario

from mtdlib.mutation import (
    Infeasible,
    RnmOptions,
    build_rnm_model,
    decode_range_schedule,
    initial_deployment,
    plan_deployment,
    schedule_rnm,
)
from mtdlib.solvers import solve_all
from mtdlib.utils.json_format import load_scenario
from mtdlib.validation import brute_force_deployment, brute_force_rnm


def tiny_scenarios():
    """Small explicit-coverage scenarios: two APs with two levels each and two users,
    over a spread of coverage sets, capacities and energy budgets.
    """

    subsets = [[], ["u1"], ["u2"], ["u1", "u2"]]

    for cover_a, cover_b, capacity, budget in itertools.product(subsets, subsets, (1, 2), (2.0, 10.0)):
        doc = {
            "aps": [
                {
                    "id": "ap1",
                    "ranges": [
                        {"radius": 1.0, "energy_rate": 1.0, "covers": cover_a},
                        {"radius": 2.0, "energy_rate": 2.0, "covers": ["u1", "u2"]},
                    ],
                    "capacity": capacity,
                    "energy_budget": budget,
                },
                {
                    "id": "ap2",
                    "ranges": [
                        {"radius": 1.0, "energy_rate": 1.0, "covers": cover_b},
                        {"radius": 2.0, "energy_rate": 1.0, "covers": ["u2"]},
                    ],
                    "capacity": 1,
                    "energy_budget": 10.0,
                },
            ],
            "users": [{"id": "u1"}, {"id": "u2"}],
        }
        yield load_scenario(io.StringIO(json.dumps(doc)))


def test_s0_enumeration():

    scenario = get_scenario("s0.json")

    result = brute_force_rnm(scenario, 2)

    assert result.count == 16
    assert get_s0_witness() in result.solutions


def test_solver_agrees_on_s0():

    scenario = get_scenario("s0.json")

    model, variables = build_rnm_model(scenario, 2)
    found = {decode_range_schedule(scenario, 2, variables, s) for s in solve_all(model, limit=1000)}

    assert found == set(brute_force_rnm(scenario, 2).solutions)


def test_solver_agrees_on_tiny_instances():

    for n, scenario in enumerate(tiny_scenarios()):
        for horizon in (1, 2, 3):
            oracle = brute_force_rnm(scenario, horizon)
            outcome = schedule_rnm(scenario, horizon, seed=n)

            assert isinstance(outcome, Infeasible) == (oracle.count == 0), f"instance {n}, T={horizon}"

            if oracle.count == 0:
                continue

            assert outcome in oracle.solutions

            model, variables = build_rnm_model(scenario, horizon, RnmOptions())
            found = {decode_range_schedule(scenario, horizon, variables, s) for s in solve_all(model, limit=10**4)}
            assert found == set(oracle.solutions), f"instance {n}, T={horizon}"


def test_g1_enumeration():

    scenario = get_g1()
    current = initial_deployment(scenario)

    result = brute_force_deployment(scenario, current, 2)

    assert result.count >= 1
    assert get_g1_witness().positions in {d.positions for d in result.solutions}


def test_deployment_planner_agrees():

    for delta_candidates in (True, False):
        scenario = get_g1(delta_candidates)
        current = initial_deployment(scenario)

        for delta in range(4):
            oracle = brute_force_deployment(scenario, current, delta)
            outcome = plan_deployment(scenario, current, delta, seed=delta)

            assert isinstance(outcome, Infeasible) == (oracle.count == 0), f"delta {delta}"

            if oracle.count:
                assert outcome.positions in {d.positions for d in oracle.solutions}


def test_guard():

    with pytest.raises(ValueError, match="exceeds guard"):
        brute_force_rnm(get_scenario("s0.json"), 3, guard=100)

    with pytest.raises(ValueError, match="exceeds guard"):
        brute_force_deployment(get_g1(), initial_deployment(get_g1()), 1, guard=100)


if __name__ == "__main__":
    test_s0_enumeration()
    test_solver_agrees_on_tiny_instances()
    test_deployment_planner_agrees()
