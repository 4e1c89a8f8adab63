"""
Side-by-side comparison of run sets.

The first run set is the baseline. A cell gets ‡ when its run set is
significantly better than the baseline (two-tailed unpaired t-test,
p < 0.05) and † when significantly worse; "better" follows the metric's
direction.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from patientgraph.errors import ConfigError
from patientgraph.metrics import (
    HIGHER_IS_BETTER,
    MetricsReport,
    RunAggregate,
    aggregate_runs,
    format_table,
    read_report,
    t_test,
)

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.json"
SIGNIFICANCE = 0.05
BETTER_MARK = "‡"
WORSE_MARK = "†"


@dataclass(frozen=True, slots=True)
class RunSet:
    label: str
    reports: tuple[MetricsReport, ...]


def expand_run_dirs(paths: Sequence[Path]) -> list[Path]:
    """A directory without metrics.json stands for its immediate run subdirectories."""
    runs: list[Path] = []
    for p in paths:
        if (p / METRICS_FILE).exists():
            runs.append(p)
            continue
        children = sorted(c for c in p.glob("*") if (c / METRICS_FILE).exists())
        if not children:
            raise FileNotFoundError(f"no {METRICS_FILE} under {p}")
        runs.extend(children)
    return runs


def load_run_set(label: str, paths: Sequence[Path]) -> RunSet:
    dirs = expand_run_dirs(paths)
    reports = tuple(read_report(d / METRICS_FILE) for d in dirs)
    logger.info("run set %s: %d runs", label, len(reports))
    return RunSet(label, reports)


def significance_markers(
    baseline: RunSet, others: Sequence[RunSet], alpha: float = SIGNIFICANCE
) -> dict[tuple[str, str], str]:
    markers: dict[tuple[str, str], str] = {}
    names = baseline.reports[0].metrics.keys()
    for rs in others:
        for m in names:
            a = [r.metrics[m] for r in rs.reports if m in r.metrics]
            b = [r.metrics[m] for r in baseline.reports]
            if len(a) < 2:
                continue
            result = t_test(a, b)
            if result.pvalue >= alpha:
                continue
            improved = (sum(a) / len(a) > sum(b) / len(b)) == HIGHER_IS_BETTER[m]
            markers[(rs.label, m)] = BETTER_MARK if improved else WORSE_MARK
    return markers


def compare_run_sets(run_sets: Sequence[RunSet]) -> tuple[str, list[tuple[str, RunAggregate]]]:
    if not run_sets:
        raise ConfigError("compare needs at least one run set")
    tasks = {r.task for rs in run_sets for r in rs.reports}
    if len(tasks) != 1:
        raise ConfigError(f"run sets mix tasks: {sorted(tasks)}")
    rows = [(rs.label, aggregate_runs(rs.reports)) for rs in run_sets]
    markers = significance_markers(run_sets[0], run_sets[1:])
    return format_table(rows, markers), rows
