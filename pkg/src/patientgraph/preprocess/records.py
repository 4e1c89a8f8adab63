"""
Patient records and the delimiter-separated ingestion files.

Three files with headers make up a cohort directory:
    patients.csv    patient_id, num:<feature>..., cat:<feature>..., bin:<feature>..., ihm, los
    diagnoses.csv   patient_id, code_path, hour
    timeseries.csv  patient_id, feature, hour, value

Records are validated here, once, at the ingestion boundary. Everything
downstream of read_cohort() trusts them.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from patientgraph.errors import DataError
from patientgraph.preprocess.codes import CodePath, parse_code_path
from patientgraph.validation import require_finite, require_non_negative

logger = logging.getLogger(__name__)

PATIENTS_FILE = "patients.csv"
DIAGNOSES_FILE = "diagnoses.csv"
TIMESERIES_FILE = "timeseries.csv"

NUMERIC_PREFIX = "num:"
CATEGORICAL_PREFIX = "cat:"
BINARY_PREFIX = "bin:"

MIN_LOS_DAYS = 1.0

Observation = tuple[float, float]


@dataclass(frozen=True, slots=True)
class DiagnosisEntry:
    path: CodePath
    hour: float  # hours since admission when the diagnosis was recorded


@dataclass(frozen=True, slots=True)
class PatientRecord:
    """One ICU admission. Missing numerics are NaN, missing categoricals ''."""

    patient_id: str
    static_numeric: Mapping[str, float]
    static_categorical: Mapping[str, str]
    static_binary: Mapping[str, int]
    diagnoses: tuple[DiagnosisEntry, ...]
    series: Mapping[str, tuple[Observation, ...]]
    ihm: int
    los: float


def validate_record(rec: PatientRecord) -> None:
    """Raise DataError naming the patient on the first violated cohort rule."""
    try:
        if not rec.patient_id:
            raise ValueError("patient_id must be non-empty")
        los = require_finite(rec.los, "los")
        if los < MIN_LOS_DAYS:
            raise ValueError(f"los must be at least {MIN_LOS_DAYS} day, got {los}")
        if rec.ihm not in (0, 1):
            raise ValueError(f"ihm must be 0 or 1, got {rec.ihm}")
        for name, flag in rec.static_binary.items():
            if flag not in (0, 1):
                raise ValueError(f"binary feature '{name}' must be 0 or 1, got {flag}")
        if not any(rec.series.values()):
            raise ValueError("at least one time-series observation is required")
        for feature, obs in rec.series.items():
            previous = -math.inf
            for t, v in obs:
                require_non_negative(t, f"{feature} timestamp")
                require_finite(v, f"{feature} value")
                if t <= previous:
                    raise ValueError(f"timestamps of '{feature}' must strictly increase")
                previous = t
    except ValueError as exc:
        raise DataError(f"patient {rec.patient_id!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------


def _read_csv(path: Path, required: Sequence[str]) -> pd.DataFrame:
    if not path.exists():
        raise FileNotFoundError(f"missing input file: {path}")
    frame = pd.read_csv(path, dtype={"patient_id": str})
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataError(f"{path.name}: missing columns {missing}")
    return frame


def _group_diagnoses(frame: pd.DataFrame, known: set[str]) -> dict[str, list[DiagnosisEntry]]:
    out: dict[str, list[DiagnosisEntry]] = defaultdict(list)
    for row_no, (pid, raw_path, hour) in enumerate(
        frame[["patient_id", "code_path", "hour"]].itertuples(index=False, name=None), start=2
    ):
        if pid not in known:
            logger.warning("%s line %d: unknown patient %r skipped", DIAGNOSES_FILE, row_no, pid)
            continue
        try:
            path = parse_code_path(raw_path if isinstance(raw_path, str) else "")
        except ValueError as exc:
            raise DataError(
                f"{DIAGNOSES_FILE} line {row_no} (patient {pid!r}): {exc}"
            ) from exc
        out[pid].append(DiagnosisEntry(path=path, hour=float(hour)))
    return out


def _group_series(frame: pd.DataFrame, known: set[str]) -> dict[str, dict[str, list[Observation]]]:
    out: dict[str, dict[str, list[Observation]]] = defaultdict(lambda: defaultdict(list))
    ordered = frame.sort_values(["patient_id", "feature", "hour"], kind="mergesort")
    for pid, feature, hour, value in ordered[["patient_id", "feature", "hour", "value"]].itertuples(
        index=False, name=None
    ):
        if pid not in known:
            continue
        out[pid][str(feature)].append((float(hour), float(value)))
    return out


def read_cohort(input_dir: Path) -> list[PatientRecord]:
    """Load and validate a cohort directory; records come back sorted by patient id."""
    patients = _read_csv(input_dir / PATIENTS_FILE, ["patient_id", "ihm", "los"])
    diagnoses = _read_csv(input_dir / DIAGNOSES_FILE, ["patient_id", "code_path", "hour"])
    series = _read_csv(input_dir / TIMESERIES_FILE, ["patient_id", "feature", "hour", "value"])

    if patients["patient_id"].duplicated().any():
        dup = patients.loc[patients["patient_id"].duplicated(), "patient_id"].iloc[0]
        raise DataError(f"{PATIENTS_FILE}: duplicate patient_id {dup!r}")

    known = set(patients["patient_id"])
    dx_by_patient = _group_diagnoses(diagnoses, known)
    ts_by_patient = _group_series(series, known)

    num_cols = [c for c in patients.columns if c.startswith(NUMERIC_PREFIX)]
    cat_cols = [c for c in patients.columns if c.startswith(CATEGORICAL_PREFIX)]
    bin_cols = [c for c in patients.columns if c.startswith(BINARY_PREFIX)]

    records: list[PatientRecord] = []
    for row in patients.to_dict(orient="records"):
        pid = str(row["patient_id"])
        rec = PatientRecord(
            patient_id=pid,
            static_numeric={
                c[len(NUMERIC_PREFIX) :]: float(row[c]) if pd.notna(row[c]) else math.nan
                for c in num_cols
            },
            static_categorical={
                c[len(CATEGORICAL_PREFIX) :]: str(row[c]) if pd.notna(row[c]) else ""
                for c in cat_cols
            },
            static_binary={
                c[len(BINARY_PREFIX) :]: int(row[c]) if pd.notna(row[c]) else 0 for c in bin_cols
            },
            diagnoses=tuple(dx_by_patient.get(pid, ())),
            series={f: tuple(obs) for f, obs in sorted(ts_by_patient.get(pid, {}).items())},
            ihm=int(row["ihm"]),
            los=float(row["los"]),
        )
        validate_record(rec)
        records.append(rec)

    records.sort(key=lambda r: r.patient_id)
    logger.info(
        "read %d patients, %d diagnosis rows, %d observations from %s",
        len(records),
        len(diagnoses),
        len(series),
        input_dir,
    )
    return records


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------


def _sorted_union(maps: Iterable[Mapping[str, object]]) -> list[str]:
    names: set[str] = set()
    for m in maps:
        names.update(m)
    return sorted(names)


def write_cohort(records: Sequence[PatientRecord], out_dir: Path) -> None:
    """Write records in the ingestion format read_cohort() accepts."""
    out_dir.mkdir(parents=True, exist_ok=True)
    num = _sorted_union(r.static_numeric for r in records)
    cat = _sorted_union(r.static_categorical for r in records)
    bins = _sorted_union(r.static_binary for r in records)

    rows = []
    for r in records:
        row: dict[str, object] = {"patient_id": r.patient_id}
        row.update({NUMERIC_PREFIX + f: r.static_numeric.get(f, math.nan) for f in num})
        row.update({CATEGORICAL_PREFIX + f: r.static_categorical.get(f, "") for f in cat})
        row.update({BINARY_PREFIX + f: r.static_binary.get(f, 0) for f in bins})
        row["ihm"] = r.ihm
        row["los"] = r.los
        rows.append(row)
    columns = (
        ["patient_id"]
        + [NUMERIC_PREFIX + f for f in num]
        + [CATEGORICAL_PREFIX + f for f in cat]
        + [BINARY_PREFIX + f for f in bins]
        + ["ihm", "los"]
    )
    pd.DataFrame(rows, columns=columns).to_csv(out_dir / PATIENTS_FILE, index=False)

    dx_rows = [
        (r.patient_id, d.path.as_str, d.hour) for r in records for d in r.diagnoses
    ]
    pd.DataFrame(dx_rows, columns=["patient_id", "code_path", "hour"]).to_csv(
        out_dir / DIAGNOSES_FILE, index=False
    )

    ts_rows = [
        (r.patient_id, feature, t, v)
        for r in records
        for feature, obs in sorted(r.series.items())
        for t, v in obs
    ]
    pd.DataFrame(ts_rows, columns=["patient_id", "feature", "hour", "value"]).to_csv(
        out_dir / TIMESERIES_FILE, index=False
    )
    logger.info("wrote %d patients to %s", len(records), out_dir)
