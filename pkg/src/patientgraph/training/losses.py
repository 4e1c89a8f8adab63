"""
Task losses built from autodiff ops.

    ihm:  mean binary cross-entropy
    los:  mean (log(1 + y_hat) - log(1 + y))^2

joint_loss adds alpha times the task loss of the LSTM-only head.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from patientgraph.autodiff import Tensor
from patientgraph.autodiff.ops import log, log1p
from patientgraph.errors import ConfigError, DimensionError, DomainError
from patientgraph.validation import first_violation


def _flat(y_hat: Tensor, y: ArrayLike) -> tuple[Tensor, NDArray[np.float64]]:
    target = np.asarray(y, dtype=np.float64).reshape(-1)
    pred = y_hat if y_hat.ndim == 1 else y_hat.reshape(-1)
    if pred.shape != target.shape:
        raise DimensionError(f"predictions {y_hat.shape} and targets {target.shape} differ")
    return pred, target


def loss_ihm(y_hat: Tensor, y: ArrayLike) -> Tensor:
    pred, target = _flat(y_hat, y)
    bad = ~((pred.data > 0.0) & (pred.data < 1.0))
    if bad.any():
        (i,) = first_violation(bad)
        raise DomainError(f"loss_ihm: prediction {pred.data[i]!r} at index {i} outside (0, 1)")
    yt = Tensor(target)
    bce = yt * log(pred) + (1.0 - yt) * log(1.0 - pred)
    return -(bce.sum() / float(target.size))


def loss_los(y_hat: Tensor, y: ArrayLike) -> Tensor:
    pred, target = _flat(y_hat, y)
    bad = ~(pred.data > 0.0)
    if bad.any():
        (i,) = first_violation(bad)
        raise DomainError(f"loss_los: prediction {pred.data[i]!r} at index {i} is not positive")
    if np.any(target <= 0.0):
        (i,) = first_violation(target <= 0.0)
        raise DomainError(f"loss_los: target {target[i]!r} at index {i} is not positive")
    diff = log1p(pred) - Tensor(np.log1p(target))
    return (diff * diff).sum() / float(target.size)


def task_loss(task: str, y_hat: Tensor, y: ArrayLike) -> Tensor:
    return loss_ihm(y_hat, y) if task == "ihm" else loss_los(y_hat, y)


def joint_loss(
    y_hat: Tensor,
    y_hat_lstm: Tensor,
    y: ArrayLike,
    alpha: float,
    task: str = "los",
) -> Tensor:
    if alpha < 0:
        raise ConfigError(f"alpha must be >= 0, got {alpha}")
    full = task_loss(task, y_hat, y)
    if alpha == 0:
        return full
    return full + alpha * task_loss(task, y_hat_lstm, y)
