"""
Linear weighted Cohen's kappa over binned length of stay.

Default buckets in days: (0,1], (1,2], ..., (7,8], (8,14], (14,inf).
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from patientgraph.errors import ConfigError
from patientgraph.metrics.regression import paired_arrays

DEFAULT_LOS_BIN_EDGES: tuple[float, ...] = (0, 1, 2, 3, 4, 5, 6, 7, 8, 14, math.inf)


def _check_edges(edges: Sequence[float]) -> NDArray[np.float64]:
    e = np.asarray(edges, dtype=np.float64)
    if e.size < 3 or np.any(np.diff(e) <= 0):
        raise ConfigError("kappa bin edges must be strictly increasing with at least 2 bins")
    return e


def bin_values(x: ArrayLike, edges: Sequence[float] = DEFAULT_LOS_BIN_EDGES) -> NDArray[np.int64]:
    """Bin b holds (edges[b], edges[b+1]]; values outside are clipped to the end bins."""
    e = _check_edges(edges)
    idx = np.searchsorted(e, np.asarray(x, dtype=np.float64), side="left") - 1
    return np.clip(idx, 0, e.size - 2).astype(np.int64)


def kappa_from_bins(a: ArrayLike, b: ArrayLike, n_bins: int) -> float:
    ra = np.asarray(a, dtype=np.int64).ravel()
    rb = np.asarray(b, dtype=np.int64).ravel()
    if n_bins < 2:
        raise ConfigError("kappa needs at least 2 bins")
    observed = np.zeros((n_bins, n_bins))
    np.add.at(observed, (ra, rb), 1.0)
    observed /= observed.sum()
    expected = np.outer(observed.sum(axis=1), observed.sum(axis=0))
    grid = np.arange(n_bins)
    weights = np.abs(grid[:, None] - grid[None, :]) / (n_bins - 1)
    denom = float(np.sum(weights * expected))
    if denom == 0.0:
        # only when both raters put everything in the same single bin
        return 1.0
    return 1.0 - float(np.sum(weights * observed)) / denom


def linear_weighted_kappa(
    y_pred: ArrayLike,
    y_true: ArrayLike,
    edges: Sequence[float] = DEFAULT_LOS_BIN_EDGES,
) -> float:
    p, y = paired_arrays(y_pred, y_true)
    n_bins = len(edges) - 1
    return kappa_from_bins(bin_values(p, edges), bin_values(y, edges), n_bins)


@dataclass(frozen=True, slots=True)
class BinError:
    label: str
    n: int
    mad: float
    msle: float


def los_error_by_bin(
    y_pred: ArrayLike,
    y_true: ArrayLike,
    edges: Sequence[float] = DEFAULT_LOS_BIN_EDGES,
) -> list[BinError]:
    """Absolute and squared-log error per true-LOS bucket (empty buckets skipped)."""
    p, y = paired_arrays(y_pred, y_true)
    bins = bin_values(y, edges)
    out: list[BinError] = []
    for b in range(len(edges) - 1):
        sel = bins == b
        if not np.any(sel):
            continue
        diff = np.log1p(p[sel]) - np.log1p(y[sel])
        out.append(
            BinError(
                label=f"({edges[b]:g}, {edges[b + 1]:g}]",
                n=int(sel.sum()),
                mad=float(np.mean(np.abs(p[sel] - y[sel]))),
                msle=float(np.mean(diff * diff)),
            )
        )
    return out
