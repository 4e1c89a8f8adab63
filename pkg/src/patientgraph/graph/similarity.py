"""
Diagnosis-similarity score between two patients.

    M_ij = a * sum_mu D_imu D_jmu (1/d_mu + c)  -  sum_mu (D_imu + D_jmu)

The first term rewards shared diagnoses, more so for rare ones (small d_mu);
the second penalises the total number of diagnoses so that patients with many
diagnoses do not become hubs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse

from patientgraph.errors import ConfigError, DataError

DEFAULT_A = 5.0
DEFAULT_C = 0.001
DEFAULT_K = 3


@dataclass(frozen=True, slots=True)
class SimilarityParams:
    a: float = DEFAULT_A
    c: float = DEFAULT_C
    k: int = DEFAULT_K
    symmetrize: bool = False

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ConfigError(f"similarity a must be > 0, got {self.a}")
        if not self.c >= 0:
            raise ConfigError(f"similarity c must be >= 0, got {self.c}")
        if self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k}")


def similarity_score(
    row_i: ArrayLike,
    row_j: ArrayLike,
    d: ArrayLike,
    a: float = DEFAULT_A,
    c: float = DEFAULT_C,
) -> float:
    ri = np.asarray(row_i, dtype=np.float64)
    rj = np.asarray(row_j, dtype=np.float64)
    counts = np.asarray(d, dtype=np.float64)
    if ri.shape != rj.shape or ri.shape != counts.shape:
        raise DataError(f"rows {ri.shape}, {rj.shape} and counts {counts.shape} differ in length")
    present = (ri + rj) > 0
    if np.any(present & (counts < 1)):
        mu = int(np.argmax(present & (counts < 1)))
        raise DataError(f"diagnosis column {mu} is present but has occurrence count {counts[mu]}")
    shared = ri * rj
    inv = np.divide(1.0, counts, out=np.zeros_like(counts), where=shared > 0)
    return float(a * np.sum(shared * (inv + c)) - np.sum(ri + rj))


def diagnosis_weights(d: ArrayLike, a: float, c: float) -> NDArray[np.float64]:
    """Per-column weight a * (1/d_mu + c) of a shared diagnosis."""
    counts = np.asarray(d, dtype=np.float64)
    if np.any(counts < 1):
        mu = int(np.argmax(counts < 1))
        raise DataError(f"diagnosis column {mu} has occurrence count {counts[mu]}")
    return a * (1.0 / counts + c)


def score_matrix_block(
    diagnoses: sparse.csr_matrix,
    rows: slice,
    weights: NDArray[np.float64],
    totals: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Dense scores of rows[start:stop] against every patient."""
    block = diagnoses[rows]
    shared = block.multiply(weights[None, :]).tocsr() @ diagnoses.T
    dense = np.asarray(shared.toarray(), dtype=np.float64)
    return dense - totals[rows][:, None] - totals[None, :]
