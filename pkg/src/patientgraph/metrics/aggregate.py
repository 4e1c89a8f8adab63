"""
Cross-run aggregation: mean with a Student-t 95% confidence half-width, and
two-tailed t-tests between run sets.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from scipy import stats

from patientgraph.errors import DimensionError, UndefinedMetricError
from patientgraph.metrics.report import MetricsReport

CONFIDENCE = 0.95


@dataclass(frozen=True, slots=True)
class MetricSummary:
    mean: float
    ci95: float
    n_runs: int


@dataclass(frozen=True, slots=True)
class RunAggregate:
    task: str
    summaries: dict[str, MetricSummary]

    def __post_init__(self) -> None:
        for name, s in self.summaries.items():
            if s.ci95 < 0:
                raise ValueError(f"{name}: CI half-width must be >= 0, got {s.ci95}")


@dataclass(frozen=True, slots=True)
class TTestResult:
    statistic: float
    pvalue: float


def mean_ci(values: ArrayLike, confidence: float = CONFIDENCE) -> MetricSummary:
    x = np.asarray(values, dtype=np.float64).ravel()
    n = x.size
    if n < 2:
        raise UndefinedMetricError(f"a confidence interval needs at least 2 runs, got {n}")
    sd = float(np.std(x, ddof=1))
    q = float(stats.t.ppf(0.5 + confidence / 2.0, n - 1))
    return MetricSummary(mean=float(np.mean(x)), ci95=q * sd / math.sqrt(n), n_runs=n)


def aggregate_runs(reports: Sequence[MetricsReport]) -> RunAggregate:
    if len(reports) < 2:
        raise UndefinedMetricError(f"aggregation needs at least 2 runs, got {len(reports)}")
    tasks = {r.task for r in reports}
    if len(tasks) != 1:
        raise UndefinedMetricError(f"cannot aggregate runs of different tasks: {sorted(tasks)}")
    names = [n for n in reports[0].metrics if all(n in r.metrics for r in reports)]
    return RunAggregate(
        task=reports[0].task,
        summaries={n: mean_ci([r.metrics[n] for r in reports]) for n in names},
    )


def t_test(a: ArrayLike, b: ArrayLike, paired: bool = False) -> TTestResult:
    """
    Two-tailed Student t-test between two run sets (equal variances assumed).

    Zero-variance inputs with equal means report p = 1.
    """
    x = np.asarray(a, dtype=np.float64).ravel()
    y = np.asarray(b, dtype=np.float64).ravel()
    if paired and x.shape != y.shape:
        raise DimensionError(f"paired t-test needs equal lengths, got {x.size} and {y.size}")
    if x.size < 2 or y.size < 2:
        raise UndefinedMetricError("t-test needs at least 2 runs per set")
    result = stats.ttest_rel(x, y) if paired else stats.ttest_ind(x, y)
    statistic, pvalue = float(result.statistic), float(result.pvalue)
    if math.isnan(pvalue):
        return TTestResult(statistic=0.0, pvalue=1.0)
    return TTestResult(statistic=statistic, pvalue=pvalue)


def write_report_rows(aggregate: RunAggregate, path: Path) -> None:
    """Machine-readable rows: metric, mean, ci95."""
    pd.DataFrame(
        [(name, s.mean, s.ci95) for name, s in aggregate.summaries.items()],
        columns=["metric", "mean", "ci95"],
    ).to_csv(path, index=False)


def format_table(
    rows: Sequence[tuple[str, RunAggregate]],
    markers: dict[tuple[str, str], str] | None = None,
) -> str:
    """Plain-text table of mean ± CI per metric, one row per run set."""
    markers = markers or {}
    if not rows:
        return ""
    metrics = list(rows[0][1].summaries)
    label_width = max(len("model"), *(len(label) for label, _ in rows))
    cells: list[list[str]] = []
    for label, agg in rows:
        line = []
        for m in metrics:
            s = agg.summaries.get(m)
            text = "-" if s is None else f"{s.mean:.3f} ± {s.ci95:.3f}"
            line.append(text + markers.get((label, m), ""))
        cells.append(line)
    widths = [max(len(m), *(len(c[i]) for c in cells)) for i, m in enumerate(metrics)]
    header = "  ".join(
        ["model".ljust(label_width)] + [m.rjust(w) for m, w in zip(metrics, widths, strict=True)]
    )
    body = [
        "  ".join(
            [label.ljust(label_width)] + [c.rjust(w) for c, w in zip(line, widths, strict=True)]
        )
        for (label, _), line in zip(rows, cells, strict=True)
    ]
    return "\n".join([header, "-" * len(header), *body])
