from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from patientgraph.errors import ConfigError

DEFAULT_RATIOS = (0.7, 0.15, 0.15)


@dataclass(frozen=True, slots=True)
class CohortSplit:
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]

    def label_of(self, patient_id: str) -> str:
        for name in ("train", "val", "test"):
            if patient_id in getattr(self, name):
                return name
        raise KeyError(patient_id)


def split_cohort(
    patient_ids: Sequence[str],
    ratios: Sequence[float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> CohortSplit:
    """
    Disjoint train/val/test partition at patient level.

    Ids are sorted, then permuted by the seed. Train and val sizes are
    floor(ratio * n); the remainder goes to test, so 10 ids split 7/1/2.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise ConfigError(f"split ratios must be three non-negative numbers, got {tuple(ratios)}")
    if not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise ConfigError(f"split ratios must sum to 1, got {sum(ratios)}")
    ids = sorted(set(patient_ids))
    n = len(ids)
    n_train = math.floor(ratios[0] * n + 1e-9)
    n_val = math.floor(ratios[1] * n + 1e-9)
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [ids[i] for i in order]
    return CohortSplit(
        train=tuple(sorted(shuffled[:n_train])),
        val=tuple(sorted(shuffled[n_train : n_train + n_val])),
        test=tuple(sorted(shuffled[n_train + n_val :])),
    )
