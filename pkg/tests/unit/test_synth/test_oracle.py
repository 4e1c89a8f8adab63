"""
Tests for synth/oracle.py.

Monte Carlo draws of the floored log-normal stay check the quadrature.
"""

import numpy as np
import pytest

from patientgraph.metrics.regression import msle
from patientgraph.synth.generator import SynthConfig, generate
from patientgraph.synth.oracle import log1p_moments, oracle_best_msle, oracle_predictions


class TestLog1pMoments:
    def test_zero_sigma(self) -> None:
        mean, var = log1p_moments(np.array([0.0, 2.0]), 0.0)
        np.testing.assert_allclose(mean, np.log1p([1.0, np.exp(2.0)]))
        np.testing.assert_array_equal(var, [0.0, 0.0])

    def test_against_monte_carlo(self) -> None:
        mu = np.array([-0.3, 0.5, 2.0])
        sigma = 0.5
        z = np.random.default_rng(0).standard_normal(400_000)
        draws = np.log1p(np.maximum(1.0, np.exp(mu[:, None] + sigma * z[None, :])))
        mean, var = log1p_moments(mu, sigma)
        np.testing.assert_allclose(mean, draws.mean(axis=1), atol=3e-3)
        np.testing.assert_allclose(var, draws.var(axis=1), atol=3e-3)

    def test_floor_shrinks_variance(self) -> None:
        # far below the floor almost every stay is one day
        _, var = log1p_moments(np.array([-5.0]), 0.5)
        assert var[0] < 1e-12


class TestOracle:
    def test_zero_noise_gives_zero(self) -> None:
        cohort = generate(SynthConfig(n_patients=30, m_leaf=9, n_channels=1, los_noise=0.0))
        assert oracle_best_msle(cohort) == 0.0
        preds = oracle_predictions(cohort)
        for rec in cohort.records:
            assert preds[rec.patient_id] == pytest.approx(rec.los, rel=1e-12)

    def test_oracle_error_matches_realised_error(self) -> None:
        cohort = generate(SynthConfig(n_patients=3000, m_leaf=30, n_channels=1, seed=5))
        preds = oracle_predictions(cohort)
        realised = msle(
            [preds[r.patient_id] for r in cohort.records], [r.los for r in cohort.records]
        )
        assert realised == pytest.approx(oracle_best_msle(cohort), rel=0.15)
