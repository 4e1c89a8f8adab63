"""
Error metrics for length-of-stay regression.

MSLE uses the log(1 + x) convention and is computed exactly as the training
LOS loss is, so both agree bit-for-bit on identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from patientgraph.errors import DimensionError, DomainError, UndefinedMetricError

MAPE_FLOOR = 1e-4


@dataclass(frozen=True, slots=True)
class RegressionMetrics:
    mad: float
    mape: float
    mse: float
    msle: float
    r2: float


def paired_arrays(
    y_pred: ArrayLike, y_true: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    p = np.asarray(y_pred, dtype=np.float64).reshape(-1)
    y = np.asarray(y_true, dtype=np.float64).reshape(-1)
    if p.shape != y.shape:
        raise DimensionError(f"predictions {p.shape} and targets {y.shape} differ in length")
    if p.size == 0:
        raise UndefinedMetricError("regression metrics need at least one sample")
    return p, y


def msle(y_pred: ArrayLike, y_true: ArrayLike) -> float:
    p, y = paired_arrays(y_pred, y_true)
    if np.any(p <= -1.0) or np.any(y <= -1.0):
        raise DomainError("msle is undefined for values <= -1")
    diff = np.log1p(p) - np.log1p(y)
    return float(np.sum(diff * diff) / float(p.size))


def r2_score(y_pred: ArrayLike, y_true: ArrayLike) -> float:
    p, y = paired_arrays(y_pred, y_true)
    total = float(np.sum((y - y.mean()) ** 2))
    if total == 0.0:
        raise UndefinedMetricError("r2 is undefined for constant targets")
    return 1.0 - float(np.sum((p - y) ** 2)) / total


def regression_metrics(y_pred: ArrayLike, y_true: ArrayLike) -> RegressionMetrics:
    p, y = paired_arrays(y_pred, y_true)
    err = p - y
    return RegressionMetrics(
        mad=float(np.mean(np.abs(err))),
        mape=100.0 * float(np.mean(np.abs(err) / np.maximum(y, MAPE_FLOOR))),
        mse=float(np.mean(err * err)),
        msle=msle(p, y),
        r2=r2_score(p, y),
    )
