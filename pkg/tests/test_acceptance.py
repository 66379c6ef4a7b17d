"""
Range mutation against the two reference eavesdroppers on the default lattice, over a
hundred seeds.
"""

import pytest

from mtdlib.adversary import compare_ensembles, reference_adversary, run_monte_carlo, static_configuration
from mtdlib.mutation import Infeasible, RnmOptions, schedule_rnm
from mtdlib.scenario import generate_lattice_scenario
from mtdlib.validation import check_range_schedule

SEEDS = list(range(1, 101))
INTERVALS = 50
HORIZON = 10

# the eavesdroppers sit 6 from the corner APs, inside the top range only
TOP = 2
CORNERS = (0, 7)


def expected_fraction(schedule):
    """Three users per corner AP are lost in every interval that AP spends at the top range.
    Over five schedule cycles that is (c_a + c_b) * 15 of the 24 * 50 user-intervals.
    """

    top_intervals = sum(schedule.range_of[i].count(TOP) for i in CORNERS)
    return top_intervals / 80


def test_reference_reduction():

    scenario = generate_lattice_scenario()
    adversary = reference_adversary()
    options = RnmOptions(lookback=2)

    schedules = {}
    for seed in SEEDS:
        schedule = schedule_rnm(scenario, HORIZON, seed, options)
        assert not isinstance(schedule, Infeasible), f"seed {seed}"
        assert check_range_schedule(scenario, schedule, lookback=2) == []
        schedules[seed] = schedule

    baseline = run_monte_carlo(scenario, static_configuration(scenario), adversary, INTERVALS, seeds=SEEDS)
    mutated = run_monte_carlo(scenario, schedules.__getitem__, adversary, INTERVALS, seeds=SEEDS)

    # each eavesdropper holds one corner AP and its three users for good
    assert baseline.summary["compromised_flow_fraction"].mean == 0.25
    assert baseline.summary["handoff_count"].max == 0

    # with two intervals of look-back every level comes back every third interval
    for report in mutated.reports:
        schedule = schedules[report.seed]
        assert report.compromised_flow_fraction == expected_fraction(schedule), f"seed {report.seed}"
        assert report.compromised_flow_fraction in (0.075, 0.0875, 0.1), f"seed {report.seed}"

    expected_mean = sum(expected_fraction(schedules[seed]) for seed in SEEDS) / len(SEEDS)
    assert mutated.summary["compromised_flow_fraction"].mean == pytest.approx(expected_mean, rel=1e-12)
    assert 0.075 <= mutated.summary["compromised_flow_fraction"].mean <= 0.1

    # the same seeds give the same numbers, bit for bit
    again = run_monte_carlo(scenario, schedules.__getitem__, adversary, INTERVALS, seeds=SEEDS)
    assert again.summary == mutated.summary

    comparison = compare_ensembles(baseline, mutated)

    assert comparison.seeds_improved >= 95
    assert comparison.mean_reduction >= 0.5
    assert comparison.reduction >= 0.5

    n_pairs = scenario.n_users * INTERVALS
    for report in mutated.reports:
        assert report.handoff_count == 0
        assert report.throughput_reduction == report.handoff_count * 0.01 / n_pairs


if __name__ == "__main__":
    test_reference_reduction()
