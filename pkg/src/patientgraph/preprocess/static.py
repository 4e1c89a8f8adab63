"""
Static feature vector x_S.

Column order is fixed by StaticLayout:
    1. numeric features, sorted by name, scaled (missing -> training mean)
    2. null indicators, one per numeric feature that had missing training values
    3. one-hot block per categorical feature, sorted by name, categories sorted
    4. binary flags, sorted by name

An unseen category at evaluation time leaves its one-hot block all zero.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from patientgraph.preprocess.records import PatientRecord
from patientgraph.preprocess.scaling import ScalerParams, apply_scaler

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class StaticLayout:
    numeric: tuple[str, ...]
    means: tuple[float, ...]
    null_indicators: tuple[str, ...]
    categories: tuple[tuple[str, tuple[str, ...]], ...]
    binary: tuple[str, ...]

    @property
    def width(self) -> int:
        return (
            len(self.numeric)
            + len(self.null_indicators)
            + sum(len(c) for _, c in self.categories)
            + len(self.binary)
        )

    def feature_names(self) -> list[str]:
        names = list(self.numeric)
        names += [f"null_{f}" for f in self.null_indicators]
        for feature, cats in self.categories:
            names += [f"{feature}={c}" for c in cats]
        names += list(self.binary)
        return names


def fit_static_layout(train_records: Sequence[PatientRecord]) -> StaticLayout:
    numeric = sorted({f for r in train_records for f in r.static_numeric})
    means: list[float] = []
    nulls: list[str] = []
    for f in numeric:
        vals = [r.static_numeric.get(f, math.nan) for r in train_records]
        finite = [v for v in vals if math.isfinite(v)]
        means.append(float(np.mean(finite)) if finite else 0.0)
        if len(finite) < len(vals):
            nulls.append(f)
    cat_names = sorted({f for r in train_records for f in r.static_categorical})
    categories = tuple(
        (
            f,
            tuple(
                sorted(
                    {
                        r.static_categorical[f]
                        for r in train_records
                        if r.static_categorical.get(f, "")
                    }
                )
            ),
        )
        for f in cat_names
    )
    binary = tuple(sorted({f for r in train_records for f in r.static_binary}))
    return StaticLayout(tuple(numeric), tuple(means), tuple(nulls), categories, binary)


def encode_static(
    rec: PatientRecord,
    scalers: ScalerParams,
    layout: StaticLayout,
) -> NDArray[np.float64]:
    out = np.zeros(layout.width)
    pos = 0
    for f, mean in zip(layout.numeric, layout.means, strict=True):
        v = rec.static_numeric.get(f, math.nan)
        out[pos] = apply_scaler(v if math.isfinite(v) else mean, scalers[f])
        pos += 1
    for f in layout.null_indicators:
        out[pos] = 0.0 if math.isfinite(rec.static_numeric.get(f, math.nan)) else 1.0
        pos += 1
    for f, cats in layout.categories:
        value = rec.static_categorical.get(f, "")
        if value in cats:
            out[pos + cats.index(value)] = 1.0
        elif value:
            logger.warning("patient %s: unseen %s category %r", rec.patient_id, f, value)
        pos += len(cats)
    for f in layout.binary:
        out[pos] = float(rec.static_binary.get(f, 0))
        pos += 1
    return out
