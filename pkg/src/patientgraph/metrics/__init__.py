"""Evaluation metrics and cross-run confidence intervals."""

from patientgraph.metrics.aggregate import (
    MetricSummary,
    RunAggregate,
    TTestResult,
    aggregate_runs,
    format_table,
    mean_ci,
    t_test,
    write_report_rows,
)
from patientgraph.metrics.classification import auprc, auroc
from patientgraph.metrics.kappa import (
    DEFAULT_LOS_BIN_EDGES,
    BinError,
    linear_weighted_kappa,
    los_error_by_bin,
)
from patientgraph.metrics.regression import RegressionMetrics, msle, regression_metrics
from patientgraph.metrics.report import (
    HIGHER_IS_BETTER,
    MetricsReport,
    compute_report,
    read_report,
    write_report,
)

__all__ = [
    "DEFAULT_LOS_BIN_EDGES",
    "HIGHER_IS_BETTER",
    "BinError",
    "MetricSummary",
    "MetricsReport",
    "RegressionMetrics",
    "RunAggregate",
    "TTestResult",
    "aggregate_runs",
    "auprc",
    "auroc",
    "compute_report",
    "format_table",
    "linear_weighted_kappa",
    "los_error_by_bin",
    "mean_ci",
    "msle",
    "read_report",
    "regression_metrics",
    "t_test",
    "write_report_rows",
]
