"""
Hierarchical multi-hot diagnosis encoding.

Every class level of a code path is a separate column, identified by its full
prefix path. A code is retained when its prevalence among training patients is
at least the threshold; a rare leaf still contributes through whichever of its
ancestors qualify. Prevalence of an ancestor is never below that of its
descendants, so the retained set is closed under qualifying ancestors.

Only diagnoses recorded before the horizon hour count.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Collection, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from scipy import sparse

from patientgraph.errors import DataError
from patientgraph.preprocess.codes import CodePath, parse_code_path
from patientgraph.preprocess.records import PatientRecord

logger = logging.getLogger(__name__)

DEFAULT_PREVALENCE_THRESHOLD = 0.005
DIAGNOSIS_HORIZON_HOURS = 24.0


@dataclass(frozen=True, slots=True)
class DiagnosisVocabulary:
    """
    Retained codes in column order, with training occurrence counts d_mu.

    Columns are ordered by (depth, path) so every parent precedes its children.
    """

    codes: tuple[CodePath, ...]
    counts: tuple[int, ...]
    threshold: float
    _column_of: dict[CodePath, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.codes) != len(self.counts):
            raise ValueError("vocabulary codes and counts differ in length")
        if any(c < 1 for c in self.counts):
            raise ValueError("every retained code needs a positive occurrence count")
        object.__setattr__(self, "_column_of", {c: i for i, c in enumerate(self.codes)})

    def __len__(self) -> int:
        return len(self.codes)

    def __contains__(self, code: object) -> bool:
        return code in self._column_of

    def column_of(self, code: CodePath | str) -> int:
        key = code if isinstance(code, CodePath) else parse_code_path(code)
        try:
            return self._column_of[key]
        except KeyError as e:
            raise KeyError(f"no column for diagnosis {key.as_str}") from e

    def code_of(self, column: int) -> CodePath:
        return self.codes[column]

    def parent_column(self, column: int) -> int | None:
        """Column of the nearest ancestor (the direct parent, when retained)."""
        parent = self.codes[column].parent
        return self._column_of.get(parent) if parent is not None else None

    @property
    def occurrence(self) -> NDArray[np.float64]:
        return np.asarray(self.counts, dtype=np.float64)


@dataclass(frozen=True, slots=True, eq=False)
class DiagnosisMatrix:
    """N x m binary CSR matrix; row i belongs to patient_ids[i]."""

    matrix: sparse.csr_matrix
    patient_ids: tuple[str, ...]

    @property
    def shape(self) -> tuple[int, int]:
        n, m = self.matrix.shape
        return int(n), int(m)

    def dense(self) -> NDArray[np.float64]:
        return np.asarray(self.matrix.toarray(), dtype=np.float64)


def patient_codes(rec: PatientRecord, horizon: float = DIAGNOSIS_HORIZON_HOURS) -> set[CodePath]:
    """All prefix codes of the diagnoses recorded before the horizon."""
    out: set[CodePath] = set()
    for entry in rec.diagnoses:
        if entry.hour < horizon:
            out.update(entry.path.prefixes())
    return out


def build_vocabulary(
    train_records: Sequence[PatientRecord],
    threshold: float = DEFAULT_PREVALENCE_THRESHOLD,
    horizon: float = DIAGNOSIS_HORIZON_HOURS,
) -> DiagnosisVocabulary:
    n_train = len(train_records)
    if n_train == 0:
        raise DataError("cannot build a diagnosis vocabulary from zero training patients")
    counts: Counter[CodePath] = Counter()
    for rec in train_records:
        counts.update(patient_codes(rec, horizon))
    kept = sorted(
        (code for code, n in counts.items() if n >= 1 and n / n_train >= threshold),
        key=lambda c: (c.depth, c.levels),
    )
    logger.info(
        "diagnosis vocabulary: %d of %d codes meet prevalence %.4f",
        len(kept),
        len(counts),
        threshold,
    )
    return DiagnosisVocabulary(
        codes=tuple(kept), counts=tuple(counts[c] for c in kept), threshold=threshold
    )


def encode_diagnoses(
    records: Sequence[PatientRecord],
    train_ids: Collection[str],
    threshold: float = DEFAULT_PREVALENCE_THRESHOLD,
    horizon: float = DIAGNOSIS_HORIZON_HOURS,
) -> tuple[DiagnosisMatrix, DiagnosisVocabulary]:
    """Fit the vocabulary on train_ids and multi-hot encode every record."""
    train = [r for r in records if r.patient_id in train_ids]
    vocab = build_vocabulary(train, threshold, horizon)
    rows: list[int] = []
    cols: list[int] = []
    for i, rec in enumerate(records):
        for code in patient_codes(rec, horizon):
            if code in vocab:
                rows.append(i)
                cols.append(vocab.column_of(code))
    matrix = sparse.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(len(records), len(vocab))
    )
    matrix.sum_duplicates()
    matrix.sort_indices()
    return DiagnosisMatrix(matrix, tuple(r.patient_id for r in records)), vocab


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def write_coo(matrix: sparse.csr_matrix, path: Path) -> None:
    """Header 'N m nnz', then one 'row col' line per set entry."""
    coo = matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    n, m = matrix.shape
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"{n} {m} {coo.nnz}\n")
        for r, c in zip(coo.row[order], coo.col[order], strict=True):
            fh.write(f"{r} {c}\n")


def read_coo(path: Path) -> sparse.csr_matrix:
    lines = path.read_text(encoding="utf-8").splitlines()
    try:
        n, m, nnz = (int(x) for x in lines[0].split())
        pairs = np.array([[int(x) for x in ln.split()] for ln in lines[1:] if ln.strip()])
    except (IndexError, ValueError) as exc:
        raise DataError(f"{path.name}: malformed coordinate list ({exc})") from exc
    if len(pairs) != nnz:
        raise DataError(f"{path.name}: header says {nnz} entries, found {len(pairs)}")
    rows = pairs[:, 0] if nnz else np.zeros(0, dtype=np.int64)
    cols = pairs[:, 1] if nnz else np.zeros(0, dtype=np.int64)
    return sparse.csr_matrix((np.ones(nnz), (rows, cols)), shape=(n, m))


def write_vocabulary(vocab: DiagnosisVocabulary, path: Path) -> None:
    frame = pd.DataFrame(
        {
            "code": [c.as_str for c in vocab.codes],
            "column": range(len(vocab)),
            "count": vocab.counts,
            "parent": [
                "" if (p := vocab.parent_column(i)) is None else vocab.codes[p].as_str
                for i in range(len(vocab))
            ],
        }
    )
    frame.to_csv(path, index=False)


def read_vocabulary(path: Path, threshold: float) -> DiagnosisVocabulary:
    frame = pd.read_csv(path, dtype={"code": str, "parent": str}, keep_default_na=False)
    frame = frame.sort_values("column")
    if list(frame["column"]) != list(range(len(frame))):
        raise DataError(f"{path.name}: columns are not 0..m-1")
    return DiagnosisVocabulary(
        codes=tuple(parse_code_path(c) for c in frame["code"]),
        counts=tuple(int(n) for n in frame["count"]),
        threshold=threshold,
    )
