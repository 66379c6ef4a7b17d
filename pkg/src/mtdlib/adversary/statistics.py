"""
Comparison of mutated against static runs, and aggregation over seed ensembles.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from mtdlib.constants.defaults import HANDOFF_COST
from mtdlib.scenario import Scenario

from .simulation import AdversaryConfig, MetricsReport, simulate

__all__ = [
    "METRICS",
    "ComparisonReport",
    "MetricSummary",
    "AggregateStatistics",
    "EnsembleComparison",
    "compare",
    "compare_ensembles",
    "run_monte_carlo",
    "metrics_frame",
]

METRICS = ("compromised_flow_fraction", "jam_outage_fraction", "handoff_count", "throughput_reduction")


@dataclass(frozen=True)
class ComparisonReport:
    baseline: float
    mutated: float
    # relative drop in compromised flow fraction; None when the baseline is zero
    reduction: Optional[float]

    @property
    def undefined(self) -> bool:
        return self.reduction is None


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    min: float
    max: float
    stderr: float


@dataclass(frozen=True)
class AggregateStatistics:
    seeds: Tuple[int, ...]
    reports: Tuple[MetricsReport, ...]
    summary: Dict[str, MetricSummary]

    def frame(self) -> pd.DataFrame:
        return metrics_frame(self.reports)


@dataclass(frozen=True)
class EnsembleComparison:
    baseline: AggregateStatistics
    mutated: AggregateStatistics
    # reduction of the mean compromised fraction
    reduction: Optional[float]
    # mean of the per-seed reductions over seeds with a nonzero baseline
    mean_reduction: Optional[float]
    seeds_improved: int


def _reduction(baseline: float, mutated: float) -> Optional[float]:

    if baseline <= 0:
        return None

    return (baseline - mutated) / baseline


def compare(baseline: MetricsReport, mutated: MetricsReport) -> ComparisonReport:
    """Relative reduction of the compromised flow fraction from ``baseline`` to ``mutated``."""

    if baseline.intervals != mutated.intervals or baseline.n_users != mutated.n_users:
        raise ValueError("mismatched run parameters")

    return ComparisonReport(
        baseline.compromised_flow_fraction,
        mutated.compromised_flow_fraction,
        _reduction(baseline.compromised_flow_fraction, mutated.compromised_flow_fraction),
    )


def metrics_frame(reports: Sequence[MetricsReport]) -> pd.DataFrame:
    """One row per report: the seed and every metric."""

    rows = [{"seed": r.seed, **{name: getattr(r, name) for name in METRICS}} for r in reports]

    return pd.DataFrame(rows, columns=["seed", *METRICS])


def _summarize(frame: pd.DataFrame) -> Dict[str, MetricSummary]:

    summary = {}
    for name in METRICS:
        column = frame[name].astype(float)
        if len(column) < 2 or column.min() == column.max():
            stderr = 0.0
        else:
            stderr = float(column.sem(ddof=1))
        summary[name] = MetricSummary(
            mean=float(column.mean()),
            min=float(column.min()),
            max=float(column.max()),
            stderr=stderr,
        )

    return summary


def run_monte_carlo(
    scenario: Scenario,
    source,
    adversary: AdversaryConfig,
    intervals: int,
    handoff_cost: float = HANDOFF_COST,
    seeds: Sequence[int] = (0,),
) -> AggregateStatistics:
    """Simulates once per seed and aggregates mean, min, max and standard error of every metric.

    :param source: A configuration source accepted by :func:`simulate`, or a callable taking
        the seed and returning one, so that each seed can plan its own mutation.
    :param seeds: Seeds. Runs, reports and sums follow ascending seed order whatever the given order.
    :type seeds: sequence of integers

    :return: Per-seed reports and their summary.
    :rtype: AggregateStatistics
    """

    if len(seeds) == 0:
        raise ValueError("expected at least one seed")

    seeds = sorted(seeds)

    reports = []
    for seed in seeds:
        run_source = source(seed) if callable(source) else source
        reports.append(simulate(scenario, run_source, adversary, intervals, handoff_cost, seed))

    return AggregateStatistics(tuple(seeds), tuple(reports), _summarize(metrics_frame(reports)))


def compare_ensembles(baseline: AggregateStatistics, mutated: AggregateStatistics) -> EnsembleComparison:
    """Seed-by-seed comparison of two ensembles run over the same seed list."""

    if baseline.seeds != mutated.seeds:
        raise ValueError("mismatched run parameters")

    per_seed = [compare(b, m) for b, m in zip(baseline.reports, mutated.reports)]
    defined = [c.reduction for c in per_seed if c.reduction is not None]

    return EnsembleComparison(
        baseline=baseline,
        mutated=mutated,
        reduction=_reduction(
            baseline.summary["compromised_flow_fraction"].mean,
            mutated.summary["compromised_flow_fraction"].mean,
        ),
        mean_reduction=float(np.mean(defined)) if defined else None,
        seeds_improved=sum(1 for c in per_seed if c.mutated < c.baseline),
    )
