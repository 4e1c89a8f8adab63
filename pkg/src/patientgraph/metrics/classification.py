"""
Ranking metrics for the binary mortality task.

NO I/O. Scores and labels are 1-D arrays of equal length; labels are 0/1.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.stats import rankdata

from patientgraph.errors import DimensionError, UndefinedMetricError


def _as_pair(scores: ArrayLike, labels: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel().astype(np.int64)
    if s.shape != y.shape:
        raise DimensionError(f"scores {s.shape} and labels {y.shape} differ in length")
    return s, y


def auroc(scores: ArrayLike, labels: ArrayLike) -> float:
    """
    Probability that a random positive outranks a random negative.

    Rank (Mann-Whitney) formulation with average ranks, so tied pairs count 1/2.
    """
    s, y = _as_pair(scores, labels)
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("auroc needs both classes among the labels")
    ranks = rankdata(s, method="average")
    u = float(ranks[y == 1].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def auprc(scores: ArrayLike, labels: ArrayLike) -> float:
    """
    Average precision: sum over distinct thresholds (descending) of
    (recall_n - recall_{n-1}) * precision_n.
    """
    s, y = _as_pair(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise UndefinedMetricError("auprc needs at least one positive label")
    order = np.argsort(-s, kind="mergesort")
    s_sorted, y_sorted = s[order], y[order]
    cut = np.r_[np.nonzero(np.diff(s_sorted))[0], s_sorted.size - 1]
    tps = np.cumsum(y_sorted)[cut].astype(np.float64)
    fps = (cut + 1) - tps
    precision = tps / (tps + fps)
    recall = tps / n_pos
    return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))
