"""
Runtime validation guards for data boundaries.

PATTERN: "Validate at Boundaries, Trust Downstream"
=========================================================

Validation happens ONLY at data boundaries:
    - Ingestion readers (preprocess.records: CSV rows -> PatientRecord)
    - Config loaders (key=value file -> RunConfig / SynthConfig)
    - Dataclass __post_init__ methods (critical invariants)
    - Public numeric entry points whose domain is narrower than R
      (losses, metrics)

Validation does NOT happen in:
    - autodiff/ops.py inner kernels - just math on checked shapes
    - models/ forward passes - just layers on validated tensors

GUARDS API:
    is_missing(value) -> bool
        True for: None, "", empty collections, NaN, +/-inf
        False for: 0, 0.0, False, "   " (whitespace)

    require_present(value, name) -> T
    require_finite(value, name) -> float
    require_positive(value, name) -> float
    require_non_negative(value, name) -> float
    require_probability(value, name, *, open_interval=False) -> float
    first_violation(bad) -> tuple[int, ...]
        index of the first True entry of a boolean mask, for error messages

EXAMPLE - Ingestion boundary:

    los = require_positive(float(row["los"]), f"{pid}.los")
    if los < MIN_LOS_DAYS:
        raise DataError(...)

    # downstream code trusts los > 0
    def loss_los(y_hat: Tensor, y: np.ndarray) -> Tensor: ...
"""

from __future__ import annotations

import math
from typing import Any, TypeVar

import numpy as np
from numpy.typing import NDArray

T = TypeVar("T")


def is_missing(value: Any) -> bool:
    """
    Check if a value is considered "missing".

    A value is missing if:
    - It is None
    - It is an empty string ""
    - It is an empty collection (list, dict, tuple, set, frozenset)
    - It is a non-finite float (NaN, Infinity, -Infinity), including numpy floats

    Note: Zero is NOT missing. False is NOT missing.

    Examples:
        >>> is_missing(None)
        True
        >>> is_missing(float("nan"))
        True
        >>> is_missing(0.0)
        False
    """
    if value is None:
        return True
    if isinstance(value, str) and value == "":
        return True
    if isinstance(value, (list, dict, tuple, set, frozenset)) and len(value) == 0:
        return True
    if isinstance(value, (float, np.floating)) and not math.isfinite(float(value)):
        return True
    return False


def require_present(value: T, name: str) -> T:
    """
    Require that a value is present (not missing).

    Raises:
        ValueError: If the value is missing

    Examples:
        >>> require_present("p0001", "patient_id")
        'p0001'
        >>> require_present(None, "los")
        Traceback (most recent call last):
        ValueError: Required value 'los' is missing
    """
    if is_missing(value):
        raise ValueError(f"Required value '{name}' is missing")
    return value


def require_finite(value: float, name: str) -> float:
    """Require a finite real number; returns it as a Python float."""
    if is_missing(value):
        raise ValueError(f"Required value '{name}' is missing")
    return float(value)


def require_positive(value: float, name: str) -> float:
    """
    Require that a value is finite and strictly positive.

    Use for lengths of stay, occurrence counts, learning rates.

    Examples:
        >>> require_positive(2.5, "los")
        2.5
        >>> require_positive(0.0, "los")
        Traceback (most recent call last):
        ValueError: 'los' must be positive, got 0.0
    """
    v = require_finite(value, name)
    if v <= 0:
        raise ValueError(f"'{name}' must be positive, got {v}")
    return v


def require_non_negative(value: float, name: str) -> float:
    """Require a finite value >= 0. Zero is allowed."""
    v = require_finite(value, name)
    if v < 0:
        raise ValueError(f"'{name}' must be non-negative, got {v}")
    return v


def require_probability(value: float, name: str, *, open_interval: bool = False) -> float:
    """
    Require a value in [0, 1], or in (0, 1) when open_interval is set.

    Examples:
        >>> require_probability(0.15, "val_ratio")
        0.15
        >>> require_probability(1.0, "dropout", open_interval=True)
        Traceback (most recent call last):
        ValueError: 'dropout' must lie in (0, 1), got 1.0
    """
    v = require_finite(value, name)
    if open_interval:
        if not 0.0 < v < 1.0:
            raise ValueError(f"'{name}' must lie in (0, 1), got {v}")
    elif not 0.0 <= v <= 1.0:
        raise ValueError(f"'{name}' must lie in [0, 1], got {v}")
    return v


def first_violation(bad: NDArray[np.bool_]) -> tuple[int, ...]:
    """Index of the first True entry of a mask, in C order."""
    if not np.any(bad):
        raise ValueError("mask has no violating entry")
    flat = int(np.argmax(np.ravel(bad)))
    return tuple(int(i) for i in np.unravel_index(flat, np.shape(bad)))
