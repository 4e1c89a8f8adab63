"""
Tests for metrics/kappa.py.

The contingency oracle rebuilds the observed and chance matrices from
scratch; scikit-learn's linear kappa is checked with every bin listed.
"""

import math

import numpy as np
import pytest
from sklearn.metrics import cohen_kappa_score

from patientgraph.errors import ConfigError
from patientgraph.metrics.kappa import (
    DEFAULT_LOS_BIN_EDGES,
    bin_values,
    kappa_from_bins,
    linear_weighted_kappa,
    los_error_by_bin,
)


def kappa_by_contingency(a: list[int], b: list[int], n_bins: int) -> float:
    n = len(a)
    obs = [[0.0] * n_bins for _ in range(n_bins)]
    for i, j in zip(a, b, strict=True):
        obs[i][j] += 1.0 / n
    row = [sum(obs[i]) for i in range(n_bins)]
    col = [sum(obs[i][j] for i in range(n_bins)) for j in range(n_bins)]
    num = den = 0.0
    for i in range(n_bins):
        for j in range(n_bins):
            w = abs(i - j) / (n_bins - 1)
            num += w * obs[i][j]
            den += w * row[i] * col[j]
    return 1.0 - num / den


class TestBinValues:
    def test_default_buckets(self) -> None:
        days = [0.5, 1.0, 1.01, 7.9, 8.0, 10.0, 14.0, 30.0]
        assert bin_values(days).tolist() == [0, 0, 1, 7, 7, 8, 8, 9]

    def test_out_of_range_clipped(self) -> None:
        assert bin_values([0.0, 100.0], (0, 1, 2)).tolist() == [0, 1]

    @pytest.mark.parametrize("edges", [(0, 1), (0, 2, 1), (0, 1, 1, 2)])
    def test_bad_edges(self, edges: tuple[float, ...]) -> None:
        with pytest.raises(ConfigError):
            bin_values([1.0], edges)


class TestLinearWeightedKappa:
    def test_perfect_agreement(self) -> None:
        los = [0.5, 2.5, 9.0, 20.0]
        assert linear_weighted_kappa(los, los) == pytest.approx(1.0)

    def test_balanced_independent_raters(self) -> None:
        pred = [0.5, 0.5, 1.5, 1.5]
        true = [0.5, 1.5, 0.5, 1.5]
        assert linear_weighted_kappa(pred, true, (0, 1, 2)) == pytest.approx(0.0)

    def test_hand_three_bins(self) -> None:
        a = [0, 0, 1, 2, 2, 1, 0]
        b = [0, 1, 1, 2, 1, 0, 0]
        assert kappa_from_bins(a, b, 3) == pytest.approx(kappa_by_contingency(a, b, 3))

    def test_constant_identical_raters(self) -> None:
        assert linear_weighted_kappa([3.5, 3.5], [3.5, 3.5]) == 1.0

    def test_constant_disagreeing_raters(self) -> None:
        assert kappa_from_bins([0, 0], [1, 1], 2) == pytest.approx(0.0)

    def test_too_few_bins(self) -> None:
        with pytest.raises(ConfigError):
            kappa_from_bins([0, 0], [0, 0], 1)

    def test_random_against_oracles(self, rng: np.random.Generator) -> None:
        n_bins = len(DEFAULT_LOS_BIN_EDGES) - 1
        for n in (10, 200):
            pred = rng.uniform(0.2, 25.0, n)
            true = rng.uniform(0.2, 25.0, n)
            a = bin_values(pred).tolist()
            b = bin_values(true).tolist()
            value = linear_weighted_kappa(pred, true)
            assert value == pytest.approx(kappa_by_contingency(a, b, n_bins), abs=1e-9)
            sk = cohen_kappa_score(a, b, labels=list(range(n_bins)), weights="linear")
            assert value == pytest.approx(sk, abs=1e-9)

    @pytest.mark.slow
    def test_randomized_sweep(self) -> None:
        rng = np.random.default_rng(33)
        for _ in range(1000):
            n = int(rng.integers(1, 201))
            n_bins = int(rng.integers(2, 11))
            a = rng.integers(0, n_bins, n).tolist()
            b = rng.integers(0, n_bins, n).tolist()
            value = kappa_from_bins(a, b, n_bins)
            if len(set(a) | set(b)) == 1:
                assert value == 1.0
            else:
                assert value == pytest.approx(kappa_by_contingency(a, b, n_bins), abs=1e-9)


class TestLosErrorByBin:
    def test_empty_buckets_skipped(self) -> None:
        rows = los_error_by_bin([1.0, 3.0, 20.0], [0.5, 2.5, 16.0])
        assert [r.label for r in rows] == ["(0, 1]", "(2, 3]", "(14, inf]"]
        assert [r.n for r in rows] == [1, 1, 1]
        assert rows[2].mad == pytest.approx(4.0)
        assert rows[0].msle == pytest.approx((math.log1p(1.0) - math.log1p(0.5)) ** 2)
