"""
End-to-end preprocessing: records -> model-ready arrays, and the on-disk
preprocessed directory format.

Scalers, the static layout (means, categories) and the diagnosis vocabulary
are fitted on the training split only.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from scipy import sparse

from patientgraph.errors import ConfigError, DataError
from patientgraph.preprocess.diagnoses import (
    DEFAULT_PREVALENCE_THRESHOLD,
    DiagnosisVocabulary,
    encode_diagnoses,
    read_coo,
    read_vocabulary,
    write_coo,
    write_vocabulary,
)
from patientgraph.preprocess.records import PatientRecord
from patientgraph.preprocess.scaling import fit_scalers
from patientgraph.preprocess.split import DEFAULT_RATIOS, split_cohort
from patientgraph.preprocess.static import encode_static, fit_static_layout
from patientgraph.preprocess.timeseries import HORIZON_HOURS, TIME_CHANNELS, build_series_tensor
from patientgraph.validation import require_probability

logger = logging.getLogger(__name__)

Task = Literal["ihm", "los"]
SplitName = Literal["train", "val", "test"]

META_FILE = "meta.json"


@dataclass(frozen=True, slots=True)
class PreprocessConfig:
    prevalence_threshold: float = DEFAULT_PREVALENCE_THRESHOLD
    horizon: int = HORIZON_HOURS
    split_ratios: tuple[float, float, float] = DEFAULT_RATIOS
    split_seed: int = 0


def validate_preprocess_config(cfg: PreprocessConfig) -> None:
    try:
        require_probability(cfg.prevalence_threshold, "prevalence_threshold")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.horizon < 1:
        raise ConfigError(f"horizon must be at least 1 hour, got {cfg.horizon}")


@dataclass(frozen=True, slots=True, eq=False)
class PreprocessedCohort:
    """Row i of every array belongs to patient_ids[i]."""

    patient_ids: tuple[str, ...]
    split: tuple[str, ...]
    ihm: NDArray[np.float64]
    los: NDArray[np.float64]
    static: NDArray[np.float64]
    static_features: tuple[str, ...]
    diagnoses: sparse.csr_matrix
    vocabulary: DiagnosisVocabulary
    series: NDArray[np.float64]
    masks: NDArray[np.float64]
    series_features: tuple[str, ...]
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def n_patients(self) -> int:
        return len(self.patient_ids)

    def indices(self, name: SplitName) -> NDArray[np.int64]:
        return np.array([i for i, s in enumerate(self.split) if s == name], dtype=np.int64)

    def labels(self, task: Task) -> NDArray[np.float64]:
        return self.ihm if task == "ihm" else self.los

    def series_inputs(self) -> NDArray[np.float64]:
        """Model input N x T x (2F + 2): values of all channels, then observed-channel masks."""
        f = len(self.series_features)
        return np.concatenate([self.series, self.masks[:, :, :f]], axis=2)

    def static_inputs(self, include_diagnoses: bool) -> NDArray[np.float64]:
        if not include_diagnoses:
            return self.static
        return np.concatenate([self.static, self.diagnoses.toarray()], axis=1)


def preprocess_cohort(
    records: Sequence[PatientRecord],
    cfg: PreprocessConfig | None = None,
) -> PreprocessedCohort:
    cfg = cfg or PreprocessConfig()
    validate_preprocess_config(cfg)
    records = sorted(records, key=lambda r: r.patient_id)
    ids = [r.patient_id for r in records]
    split = split_cohort(ids, cfg.split_ratios, cfg.split_seed)
    train_ids = set(split.train)
    if not train_ids:
        raise DataError("training split is empty")
    train = [r for r in records if r.patient_id in train_ids]

    series_features = sorted({f for r in train for f in r.series})
    layout = fit_static_layout(train)
    scalers = fit_scalers(train, list(layout.numeric) + series_features)

    static = np.stack([encode_static(r, scalers, layout) for r in records])
    diag, vocab = encode_diagnoses(records, train_ids, cfg.prevalence_threshold, cfg.horizon)
    series, masks = build_series_tensor(records, series_features, scalers, cfg.horizon)

    labels = {pid: "train" for pid in split.train}
    labels.update({pid: "val" for pid in split.val})
    labels.update({pid: "test" for pid in split.test})

    meta = {
        "horizon": cfg.horizon,
        "prevalence_threshold": cfg.prevalence_threshold,
        "split_ratios": list(cfg.split_ratios),
        "split_seed": cfg.split_seed,
        "static_features": layout.feature_names(),
        "series_features": series_features,
        "time_channels": list(TIME_CHANNELS),
        "scalers": {f: [s.p5, s.p95] for f, s in scalers.items()},
        "layout": {
            "numeric": list(layout.numeric),
            "means": list(layout.means),
            "null_indicators": list(layout.null_indicators),
            "categories": {f: list(c) for f, c in layout.categories},
            "binary": list(layout.binary),
        },
    }
    logger.info(
        "preprocessed %d patients: %d/%d/%d split, %d static, %d series, %d diagnosis columns",
        len(records),
        len(split.train),
        len(split.val),
        len(split.test),
        static.shape[1],
        len(series_features),
        len(vocab),
    )
    return PreprocessedCohort(
        patient_ids=tuple(ids),
        split=tuple(labels[pid] for pid in ids),
        ihm=np.array([r.ihm for r in records], dtype=np.float64),
        los=np.array([r.los for r in records], dtype=np.float64),
        static=static,
        static_features=tuple(layout.feature_names()),
        diagnoses=diag.matrix,
        vocabulary=vocab,
        series=series,
        masks=masks,
        series_features=tuple(series_features),
        meta=meta,
    )


def save_preprocessed(cohort: PreprocessedCohort, out_dir: Path) -> list[Path]:
    """Write the preprocessed directory; returns the files written."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {
        name: out_dir / name
        for name in (
            "patients.csv",
            "static.npy",
            "series.npy",
            "masks.npy",
            "diagnoses.coo",
            "vocabulary.csv",
            META_FILE,
        )
    }
    pd.DataFrame(
        {
            "patient_id": cohort.patient_ids,
            "split": cohort.split,
            "ihm": cohort.ihm.astype(np.int64),
            "los": cohort.los,
        }
    ).to_csv(written["patients.csv"], index=False)
    np.save(written["static.npy"], cohort.static)
    np.save(written["series.npy"], cohort.series)
    np.save(written["masks.npy"], cohort.masks)
    write_coo(cohort.diagnoses, written["diagnoses.coo"])
    write_vocabulary(cohort.vocabulary, written["vocabulary.csv"])
    written[META_FILE].write_text(json.dumps(cohort.meta, indent=2, sort_keys=True) + "\n")
    logger.info("wrote preprocessed cohort to %s", out_dir)
    return list(written.values())


def load_preprocessed(in_dir: Path) -> PreprocessedCohort:
    meta_path = in_dir / META_FILE
    if not meta_path.exists():
        raise FileNotFoundError(f"not a preprocessed directory (no {META_FILE}): {in_dir}")
    meta = json.loads(meta_path.read_text())
    patients = pd.read_csv(in_dir / "patients.csv", dtype={"patient_id": str, "split": str})
    cohort = PreprocessedCohort(
        patient_ids=tuple(patients["patient_id"]),
        split=tuple(patients["split"]),
        ihm=patients["ihm"].to_numpy(dtype=np.float64),
        los=patients["los"].to_numpy(dtype=np.float64),
        static=np.load(in_dir / "static.npy"),
        static_features=tuple(meta["static_features"]),
        diagnoses=read_coo(in_dir / "diagnoses.coo"),
        vocabulary=read_vocabulary(in_dir / "vocabulary.csv", meta["prevalence_threshold"]),
        series=np.load(in_dir / "series.npy"),
        masks=np.load(in_dir / "masks.npy"),
        series_features=tuple(meta["series_features"]),
        meta=meta,
    )
    n = cohort.n_patients
    if cohort.static.shape[0] != n or cohort.series.shape[0] != n or cohort.diagnoses.shape[0] != n:
        raise DataError(f"{in_dir}: arrays disagree on the number of patients ({n})")
    return cohort
