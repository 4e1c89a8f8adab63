"""Tests for validation.guards module."""

import math

import numpy as np
import pytest

from patientgraph.validation.guards import (
    first_violation,
    is_missing,
    require_finite,
    require_non_negative,
    require_positive,
    require_present,
    require_probability,
)


class TestIsMissing:
    """Tests for is_missing() function."""

    # --- Values that ARE missing ---

    @pytest.mark.parametrize(
        "value",
        [None, "", [], {}, (), set(), frozenset(), math.nan, math.inf, -math.inf],
    )
    def test_missing(self, value: object) -> None:
        assert is_missing(value) is True

    def test_numpy_nan_is_missing(self) -> None:
        assert is_missing(np.float64("nan")) is True
        assert is_missing(np.float32("inf")) is True

    # --- Values that are NOT missing ---

    @pytest.mark.parametrize("value", [0, 0.0, False, "   ", "p0001", [0], np.float64(0.0)])
    def test_present(self, value: object) -> None:
        assert is_missing(value) is False


class TestRequirePresent:
    def test_returns_value_unchanged(self) -> None:
        codes = ["cardio", "chf"]
        assert require_present(codes, "codes") is codes

    def test_missing_names_field(self) -> None:
        with pytest.raises(ValueError, match="Required value 'los' is missing"):
            require_present(None, "los")


class TestRequireFinite:
    def test_converts_numpy_scalar(self) -> None:
        v = require_finite(np.float64(2.5), "x")
        assert v == 2.5
        assert type(v) is float

    def test_nan(self) -> None:
        with pytest.raises(ValueError, match="'x' is missing"):
            require_finite(math.nan, "x")


class TestRequirePositive:
    def test_positive(self) -> None:
        assert require_positive(1e-12, "lr") == 1e-12

    @pytest.mark.parametrize("value", [0.0, -1.0])
    def test_not_positive(self, value: float) -> None:
        with pytest.raises(ValueError, match="'los' must be positive"):
            require_positive(value, "los")

    def test_infinite(self) -> None:
        with pytest.raises(ValueError, match="missing"):
            require_positive(math.inf, "los")


class TestRequireNonNegative:
    def test_zero_allowed(self) -> None:
        assert require_non_negative(0.0, "weight_decay") == 0.0

    def test_negative(self) -> None:
        with pytest.raises(ValueError, match="non-negative, got -0.5"):
            require_non_negative(-0.5, "weight_decay")


class TestRequireProbability:
    @pytest.mark.parametrize("value", [0.0, 0.3, 1.0])
    def test_closed_interval(self, value: float) -> None:
        assert require_probability(value, "ratio") == value

    @pytest.mark.parametrize("value", [0.0, 1.0])
    def test_open_interval_rejects_endpoints(self, value: float) -> None:
        with pytest.raises(ValueError, match=r"must lie in \(0, 1\)"):
            require_probability(value, "dropout", open_interval=True)

    @pytest.mark.parametrize("value", [-0.1, 1.5])
    def test_outside(self, value: float) -> None:
        with pytest.raises(ValueError, match=r"must lie in \[0, 1\]"):
            require_probability(value, "ratio")


class TestFirstViolation:
    def test_flat_mask(self) -> None:
        assert first_violation(np.array([False, False, True, True])) == (2,)

    def test_first_in_row_major_order(self) -> None:
        bad = np.zeros((3, 4), dtype=bool)
        bad[2, 0] = True
        bad[1, 3] = True
        assert first_violation(bad) == (1, 3)

    def test_clean_mask(self) -> None:
        with pytest.raises(ValueError, match="no violating entry"):
            first_violation(np.zeros(5, dtype=bool))
