import io
import json

import pytest
from conftest import ASSETS, get_s0_witness, get_scenario

from mtdlib.mutation import (
    Infeasible,
    RangeSchedule,
    RnmOptions,
    StructuralInfeasibility,
    build_rnm_model,
    decode_range_schedule,
    diagnose_rnm,
    energy_of,
    schedule_rnm,
    schedule_timeline,
)
from mtdlib.scenario import generate_lattice_scenario
from mtdlib.solvers import solve_all
from mtdlib.utils.json_format import load_scenario
from mtdlib.validation import check_range_schedule


def get_s0_variant(**changes):
    """s0.json with top-level AP fields replaced, e.g. ``capacity=[1, 1]``."""

    doc = json.loads((ASSETS / "s0.json").read_text())
    for key, values in changes.items():
        for ap, value in zip(doc["aps"], values):
            ap[key] = value

    return load_scenario(io.StringIO(json.dumps(doc)))


def test_s0_schedule():

    scenario = get_scenario("s0.json")

    schedule = schedule_rnm(scenario, 2, seed=7)

    assert isinstance(schedule, RangeSchedule)
    assert schedule.horizon == 2
    assert check_range_schedule(scenario, schedule) == []
    assert list(schedule.energy_used) == energy_of(scenario, schedule)

    # alternating two levels over two intervals always costs 1 + 2
    assert list(schedule.energy_used) == [3.0, 3.0]


def test_witness_energy():

    scenario = get_scenario("s0.json")

    assert energy_of(scenario, get_s0_witness()) == [3.0, 3.0]


def test_deterministic_per_seed():

    scenario = get_scenario("s0.json")

    assert schedule_rnm(scenario, 2, seed=1) == schedule_rnm(scenario, 2, seed=1)

    schedules = {schedule_rnm(scenario, 2, seed=s) for s in range(100)}
    assert len(schedules) > 1

    for schedule in schedules:
        assert check_range_schedule(scenario, schedule) == []


def test_s0_solution_count():

    scenario = get_scenario("s0.json")
    model, variables = build_rnm_model(scenario, 2)

    solutions = solve_all(model, limit=1000)

    # four range sequence pairs, each with four associations over the two intervals
    assert len(solutions) == 16

    decoded = {decode_range_schedule(scenario, 2, variables, s) for s in solutions}
    assert len(decoded) == 16
    assert get_s0_witness() in decoded


def test_energy_infeasible():

    scenario = get_scenario("s0_no_energy.json")

    outcome = schedule_rnm(scenario, 2, seed=0)

    assert isinstance(outcome, Infeasible)
    assert outcome.reason == "unsat"
    assert outcome.constraint == "energy"
    assert str(outcome) == "unsatisfiable: energy"


def test_energy_budget_binds():

    scenario = get_s0_variant(energy_budget=[4.0, 10.0])

    # over three intervals ap1 alternates; starting high would cost 2 + 1 + 2
    model, variables = build_rnm_model(scenario, 3)
    for solution in solve_all(model, limit=1000):
        schedule = decode_range_schedule(scenario, 3, variables, solution)
        assert schedule.range_of[0] == (0, 1, 0)
        assert check_range_schedule(scenario, schedule) == []

    schedule = schedule_rnm(scenario, 3, seed=5)
    assert schedule.energy_used[0] == 4.0


def test_unpredictability_infeasible():

    scenario = get_scenario("minimal.json")

    outcome = schedule_rnm(scenario, 2, seed=0)
    assert isinstance(outcome, Infeasible)
    assert outcome.constraint == "unpredictability"

    # a single interval has nothing to repeat
    schedule = schedule_rnm(scenario, 1, seed=0)
    assert schedule.range_of == ((0,),)

    assert diagnose_rnm(get_scenario("s0.json"), 3, lookback=2) == "unpredictability"


def test_coverage_infeasible():

    doc = json.loads((ASSETS / "s0.json").read_text())
    for ap in doc["aps"]:
        for level in ap["ranges"]:
            level["covers"] = [u for u in level["covers"] if u != "u2"]
    scenario = load_scenario(io.StringIO(json.dumps(doc)))

    with pytest.raises(StructuralInfeasibility) as error:
        build_rnm_model(scenario, 2)

    assert error.value.user_id == "u2"

    outcome = schedule_rnm(scenario, 2, seed=0)
    assert outcome.constraint == "coverage"


def test_capacity_infeasible():

    doc = json.loads((ASSETS / "s0.json").read_text())
    doc["aps"][0]["capacity"] = 1
    for level in doc["aps"][0]["ranges"]:
        level["covers"] = ["u1", "u2"]
    for level in doc["aps"][1]["ranges"]:
        level["covers"] = []
    scenario = load_scenario(io.StringIO(json.dumps(doc)))

    outcome = schedule_rnm(scenario, 2, seed=0)

    assert isinstance(outcome, Infeasible)
    assert outcome.reason == "unsat"
    assert outcome.constraint == "capacity"


def test_lookback_two():

    scenario = generate_lattice_scenario()

    schedule = schedule_rnm(scenario, 10, seed=3, options=RnmOptions(lookback=2))

    assert check_range_schedule(scenario, schedule, lookback=2) == []

    for row in schedule.range_of:
        for j in range(8):
            assert len(set(row[j : j + 3])) == 3

    for j in range(10):
        assert schedule.assignment[j] == tuple(k // 3 for k in range(24))


def test_budget_outcome():

    scenario = generate_lattice_scenario()

    outcome = schedule_rnm(scenario, 10, seed=0, options=RnmOptions(node_budget=1))

    assert isinstance(outcome, Infeasible)
    assert outcome.reason == "budget"
    assert str(outcome) == "search budget exceeded"

    schedule = schedule_rnm(scenario, 10, seed=0, options=RnmOptions(restarts=3))
    assert check_range_schedule(scenario, schedule) == []


def test_bad_arguments():

    scenario = get_scenario("s0.json")

    with pytest.raises(ValueError):
        build_rnm_model(scenario, 0)

    with pytest.raises(ValueError):
        build_rnm_model(scenario, 2, RnmOptions(lookback=0))


def test_timeline():

    scenario = get_scenario("s0.json")

    segments = schedule_timeline(scenario, get_s0_witness(), 30.0)

    assert [(s.ap, s.level, s.start, s.end) for s in segments] == [
        (0, 1, 0.0, 30.0),
        (0, 0, 30.0, 60.0),
        (1, 0, 0.0, 30.0),
        (1, 1, 30.0, 60.0),
    ]
    assert segments[0].radius == 6.0

    # repeated levels merge into one segment
    schedule = RangeSchedule(3, ((0, 0, 1), (1, 1, 1)), ((0, 1),) * 3, ())
    segments = schedule_timeline(scenario, schedule, 10.0)

    assert [(s.ap, s.level, s.start, s.end) for s in segments] == [
        (0, 0, 0.0, 20.0),
        (0, 1, 20.0, 30.0),
        (1, 1, 0.0, 30.0),
    ]

    with pytest.raises(ValueError):
        schedule_timeline(scenario, schedule, 0.0)


if __name__ == "__main__":
    test_s0_schedule()
    test_s0_solution_count()
    test_lookback_two()
