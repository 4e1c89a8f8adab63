"""
Percentile scaling to [-1, 1] with hard cut-offs at [-4, 4].

The 5th percentile maps to -1 and the 95th to +1 by the affine map
    s(x) = 2 * (x - p5) / (p95 - p5) - 1
and the result is clipped to [-4, 4]. A degenerate feature (p5 == p95)
scales every value to 0. Percentiles use linear interpolation between
order statistics.

NO I/O. Scalers are fitted on training records only.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from patientgraph.errors import DataError
from patientgraph.preprocess.records import PatientRecord

LOWER_PERCENTILE = 5.0
UPPER_PERCENTILE = 95.0
CLIP = 4.0


@dataclass(frozen=True, slots=True)
class FeatureScaler:
    p5: float
    p95: float

    def __post_init__(self) -> None:
        if not self.p5 <= self.p95:
            raise ValueError(f"scaler needs p5 <= p95, got {self.p5} > {self.p95}")


ScalerParams = dict[str, FeatureScaler]


def fit_feature_scaler(values: ArrayLike, name: str = "feature") -> FeatureScaler:
    arr = np.asarray(values, dtype=np.float64).ravel()
    arr = arr[np.isfinite(arr)]
    if arr.size == 0:
        raise DataError(f"missing feature: '{name}' has no finite observations in training")
    lo, hi = np.percentile(arr, [LOWER_PERCENTILE, UPPER_PERCENTILE])
    return FeatureScaler(p5=float(lo), p95=float(hi))


def _feature_values(records: Iterable[PatientRecord], feature: str) -> list[float]:
    out: list[float] = []
    for r in records:
        v = r.static_numeric.get(feature)
        if v is not None and math.isfinite(v):
            out.append(v)
        out.extend(value for _, value in r.series.get(feature, ()))
    return out


def fit_scalers(records: Sequence[PatientRecord], features: Sequence[str]) -> ScalerParams:
    """Fit one scaler per feature from static numerics and series observations."""
    return {f: fit_feature_scaler(_feature_values(records, f), f) for f in features}


def apply_scaler(x: float, params: FeatureScaler) -> float:
    if params.p5 == params.p95:
        return 0.0
    raw = 2.0 * (x - params.p5) / (params.p95 - params.p5) - 1.0
    return min(max(raw, -CLIP), CLIP)


def scale_array(x: ArrayLike, params: FeatureScaler) -> NDArray[np.float64]:
    arr = np.asarray(x, dtype=np.float64)
    if params.p5 == params.p95:
        return np.zeros_like(arr)
    raw = 2.0 * (arr - params.p5) / (params.p95 - params.p5) - 1.0
    return np.clip(raw, -CLIP, CLIP)


def unscale(s: float, params: FeatureScaler) -> float:
    """Inverse of apply_scaler inside the clipping range."""
    if params.p5 == params.p95:
        return params.p5
    return (s + 1.0) * (params.p95 - params.p5) / 2.0 + params.p5
