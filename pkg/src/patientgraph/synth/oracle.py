"""
Bayes-optimal LOS error on a synthetic cohort.

A predictor that knows every patient's latent effects still faces the
planted noise: log LOS = mu + sigma * z with z standard normal, floored at
one day. Under MSLE the best constant prediction for a patient is the one
whose log1p equals E[log1p(LOS)], and its expected error is Var[log1p(LOS)].
Both moments are integrated with probabilists' Gauss-Hermite quadrature.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import hermite_e
from numpy.typing import ArrayLike, NDArray

from patientgraph.synth.generator import SyntheticCohort

QUADRATURE_POINTS = 96


def log1p_moments(
    mu: ArrayLike, sigma: float, points: int = QUADRATURE_POINTS
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Mean and variance of log1p(max(1, exp(mu + sigma z))) per entry of mu."""
    m = np.asarray(mu, dtype=np.float64)
    if sigma == 0.0:
        value = np.log1p(np.maximum(1.0, np.exp(m)))
        return value, np.zeros_like(value)
    nodes, weights = hermite_e.hermegauss(points)
    weights = weights / np.sqrt(2.0 * np.pi)
    values = np.log1p(np.maximum(1.0, np.exp(m[:, None] + sigma * nodes[None, :])))
    mean = values @ weights
    second = (values * values) @ weights
    return mean, np.maximum(second - mean * mean, 0.0)


def oracle_best_msle(cohort: SyntheticCohort) -> float:
    """Expected MSLE of the predictor that knows the latent effects; 0 without noise."""
    mu = np.array([t.los_mu for t in cohort.truth])
    _, variance = log1p_moments(mu, cohort.config.los_noise)
    return float(variance.mean())


def oracle_predictions(cohort: SyntheticCohort) -> dict[str, float]:
    """Per-patient Bayes LOS predictions under MSLE."""
    mu = np.array([t.los_mu for t in cohort.truth])
    mean, _ = log1p_moments(mu, cohort.config.los_noise)
    return {t.patient_id: float(v) for t, v in zip(cohort.truth, np.expm1(mean), strict=True)}
