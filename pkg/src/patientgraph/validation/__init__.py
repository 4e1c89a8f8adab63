"""Validation guards for data boundaries."""

from patientgraph.validation.guards import (
    first_violation,
    is_missing,
    require_finite,
    require_non_negative,
    require_positive,
    require_present,
    require_probability,
)

__all__ = [
    "first_violation",
    "is_missing",
    "require_present",
    "require_positive",
    "require_non_negative",
    "require_finite",
    "require_probability",
]
