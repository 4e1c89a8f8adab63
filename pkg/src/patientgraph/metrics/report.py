from __future__ import annotations

import json
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike

from patientgraph.errors import DataError
from patientgraph.metrics.classification import auprc, auroc
from patientgraph.metrics.kappa import DEFAULT_LOS_BIN_EDGES, linear_weighted_kappa
from patientgraph.metrics.regression import regression_metrics

logger = logging.getLogger(__name__)

Task = Literal["ihm", "los"]

IHM_METRICS = ("auroc", "auprc")
LOS_METRICS = ("mad", "mape", "mse", "msle", "r2", "kappa")

# True when a larger value is better.
HIGHER_IS_BETTER: dict[str, bool] = {
    "auroc": True,
    "auprc": True,
    "kappa": True,
    "r2": True,
    "mad": False,
    "mape": False,
    "mse": False,
    "msle": False,
}

_UNIT_INTERVAL = ("auroc", "auprc")
_NON_NEGATIVE = ("mad", "mape", "mse", "msle")


def metric_names(task: Task) -> tuple[str, ...]:
    return IHM_METRICS if task == "ihm" else LOS_METRICS


@dataclass(frozen=True, slots=True)
class MetricsReport:
    task: Task
    n: int
    metrics: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, value in self.metrics.items():
            if math.isnan(value):
                continue
            if name in _UNIT_INTERVAL and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
            if name == "kappa" and not -1.0 <= value <= 1.0:
                raise ValueError(f"kappa must lie in [-1, 1], got {value}")
            if name in _NON_NEGATIVE and value < 0.0:
                raise ValueError(f"{name} must be non-negative, got {value}")

    def __getitem__(self, name: str) -> float:
        return self.metrics[name]


def compute_report(
    task: Task,
    y_pred: ArrayLike,
    y_true: ArrayLike,
    kappa_edges: Sequence[float] = DEFAULT_LOS_BIN_EDGES,
) -> MetricsReport:
    p = np.asarray(y_pred, dtype=np.float64).reshape(-1)
    y = np.asarray(y_true, dtype=np.float64).reshape(-1)
    if task == "ihm":
        values = {"auroc": auroc(p, y), "auprc": auprc(p, y)}
    else:
        reg = regression_metrics(p, y)
        values = {
            "mad": reg.mad,
            "mape": reg.mape,
            "mse": reg.mse,
            "msle": reg.msle,
            "r2": reg.r2,
            "kappa": linear_weighted_kappa(p, y, kappa_edges),
        }
    return MetricsReport(task=task, n=int(p.size), metrics=values)


def write_report(report: MetricsReport, path: Path) -> None:
    payload = {"task": report.task, "n": report.n, "metrics": dict(report.metrics)}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_report(path: Path) -> MetricsReport:
    if not path.exists():
        raise FileNotFoundError(f"missing metrics report: {path}")
    try:
        raw = json.loads(path.read_text())
        task = raw["task"]
        if task not in ("ihm", "los"):
            raise ValueError(f"unknown task {task!r}")
        return MetricsReport(
            task=task,
            n=int(raw["n"]),
            metrics={k: float(v) for k, v in raw["metrics"].items()},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed metrics report ({exc})") from exc
