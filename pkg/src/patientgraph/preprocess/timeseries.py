"""
Hourly resampling with forward fill.

Grid points are hours 1..horizon. Point h takes the last observation with
timestamp <= h; points before the first observation take the first value
(back-fill). The presence mask is 1 from the first grid point at or after the
first observation onwards. Observations past the horizon are ignored.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
from numpy.typing import NDArray

from patientgraph.errors import DataError
from patientgraph.preprocess.records import Observation, PatientRecord
from patientgraph.preprocess.scaling import ScalerParams, scale_array

logger = logging.getLogger(__name__)

HORIZON_HOURS = 24
TIME_CHANNELS = ("time_in_icu", "time_of_day")


def resample_hourly(
    series: Sequence[Observation],
    horizon: int = HORIZON_HOURS,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    obs = [(t, v) for t, v in series if t <= horizon]
    if not obs:
        raise DataError("cannot resample an empty series")
    times = np.array([t for t, _ in obs], dtype=np.float64)
    values = np.array([v for _, v in obs], dtype=np.float64)
    grid = np.arange(1, horizon + 1, dtype=np.float64)
    pos = np.searchsorted(times, grid, side="right") - 1
    mask = (pos >= 0).astype(np.float64)
    return values[np.maximum(pos, 0)], mask


def time_channels(admit_hour: float, horizon: int = HORIZON_HOURS) -> NDArray[np.float64]:
    """(horizon x 2): hours since admission / 24, and hour of day scaled to [-1, 1]."""
    h = np.arange(1, horizon + 1, dtype=np.float64)
    hour_of_day = np.mod(np.floor(admit_hour) + h, 24.0)
    return np.stack([h / 24.0, 2.0 * hour_of_day / 23.0 - 1.0], axis=1)


def build_series_tensor(
    records: Sequence[PatientRecord],
    features: Sequence[str],
    scalers: ScalerParams,
    horizon: int = HORIZON_HOURS,
    admit_feature: str = "hour_of_admission",
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Assemble scaled values and masks, N x horizon x (F + 2).

    The last two channels are the time channels with mask 1. A feature with
    no observation for a patient stays at 0 (the scaled centre) with mask 0.
    """
    n, f = len(records), len(features)
    values = np.zeros((n, horizon, f + len(TIME_CHANNELS)))
    masks = np.zeros_like(values)
    absent = 0
    for i, rec in enumerate(records):
        for j, feature in enumerate(features):
            obs = rec.series.get(feature, ())
            if not obs or obs[0][0] > horizon:
                absent += 1
                continue
            raw, mask = resample_hourly(obs, horizon)
            values[i, :, j] = scale_array(raw, scalers[feature])
            masks[i, :, j] = mask
        admit = rec.static_numeric.get(admit_feature, 0.0)
        values[i, :, f:] = time_channels(admit if np.isfinite(admit) else 0.0, horizon)
        masks[i, :, f:] = 1.0
    if absent:
        logger.warning(
            "%d patient/feature series absent within %dh; filled with 0", absent, horizon
        )
    return values, masks
