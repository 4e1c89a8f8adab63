"""Shared test fixtures for all test packages.

A hand-built three-patient cohort for exact preprocessing checks, plus a
small seeded synthetic cohort (with its preprocessed arrays and k-NN graph)
used by the graph, model, training and CLI tests.

All fixtures are deterministic: fixed seeds, no network, files only under
pytest's tmp_path.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence

import numpy as np
import pytest

from patientgraph.graph import PatientGraph, SimilarityParams, build_knn_graph
from patientgraph.preprocess import PreprocessedCohort, preprocess_cohort
from patientgraph.preprocess.codes import parse_code_path
from patientgraph.preprocess.records import DiagnosisEntry, PatientRecord
from patientgraph.synth import SynthConfig, SyntheticCohort, generate

SMALL_SYNTH = SynthConfig(n_patients=60, m_leaf=12, depth=3, n_channels=3, seed=7)


def build_record(
    pid: str,
    *,
    diagnoses: Sequence[tuple[str, float]] = (("a|b", 1.0),),
    series: Mapping[str, Sequence[tuple[float, float]]] | None = None,
    numeric: Mapping[str, float] | None = None,
    categorical: Mapping[str, str] | None = None,
    binary: Mapping[str, int] | None = None,
    ihm: int = 0,
    los: float = 2.0,
) -> PatientRecord:
    """A valid record with small defaults; override only what a test checks."""
    return PatientRecord(
        patient_id=pid,
        static_numeric=dict(numeric or {"age": 60.0, "hour_of_admission": 8.0}),
        static_categorical=dict(categorical or {"gender": "female"}),
        static_binary=dict(binary or {"emergency_admission": 0}),
        diagnoses=tuple(DiagnosisEntry(parse_code_path(c), h) for c, h in diagnoses),
        series={
            f: tuple(obs)
            for f, obs in (series or {"heart_rate": [(0.5, 80.0), (3.0, 90.0)]}).items()
        },
        ihm=ihm,
        los=los,
    )


RecordFactory = Callable[..., PatientRecord]


@pytest.fixture()
def make_record() -> RecordFactory:
    return build_record


@pytest.fixture()
def three_records() -> list[PatientRecord]:
    """Three patients with one missing weight and one unseen unit type."""
    return [
        build_record(
            "p1",
            diagnoses=[("cardio|chf", 2.0), ("renal|aki", 30.0)],
            numeric={"age": 50.0, "weight": 70.0, "hour_of_admission": 0.0},
            categorical={"unit": "micu"},
            los=1.5,
        ),
        build_record(
            "p2",
            diagnoses=[("cardio|chf", 1.0)],
            numeric={"age": 70.0, "weight": math.nan, "hour_of_admission": 12.0},
            categorical={"unit": "sicu"},
            ihm=1,
            los=4.0,
        ),
        build_record(
            "p3",
            diagnoses=[("cardio|af", 5.0)],
            numeric={"age": 90.0, "weight": 90.0, "hour_of_admission": 23.0},
            categorical={"unit": "ccu"},
            los=10.0,
        ),
    ]


@pytest.fixture(scope="session")
def small_synth() -> SyntheticCohort:
    return generate(SMALL_SYNTH)


@pytest.fixture(scope="session")
def small_cohort(small_synth: SyntheticCohort) -> PreprocessedCohort:
    return preprocess_cohort(list(small_synth.records))


@pytest.fixture(scope="session")
def small_graph(small_cohort: PreprocessedCohort) -> PatientGraph:
    return build_knn_graph(
        small_cohort.diagnoses, small_cohort.vocabulary.occurrence, SimilarityParams(k=3)
    )


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
