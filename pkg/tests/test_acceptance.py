"""
Directional experiments on the default planted cohort.

These train several models for several seeds and take many minutes, so they
are marked slow and deselected by default. Run with `pytest -m slow`.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from patientgraph.graph import PatientGraph, SimilarityParams, build_knn_graph
from patientgraph.metrics import t_test
from patientgraph.models.lstm_gnn import ModelConfig
from patientgraph.preprocess import PreprocessedCohort, preprocess_cohort
from patientgraph.synth import SynthConfig, SyntheticCohort, generate
from patientgraph.synth.oracle import oracle_best_msle
from patientgraph.training import build_model, evaluate_inductive, train
from patientgraph.training.trainer import TrainConfig

pytestmark = pytest.mark.slow

SEEDS = (0, 1, 2, 3, 4)
EXPERIMENT_TRAIN = TrainConfig()


@pytest.fixture(scope="module")
def planted() -> SyntheticCohort:
    return generate(SynthConfig())


@pytest.fixture(scope="module")
def cohort(planted: SyntheticCohort) -> PreprocessedCohort:
    return preprocess_cohort(list(planted.records))


@pytest.fixture(scope="module")
def graph(cohort: PreprocessedCohort) -> PatientGraph:
    return build_knn_graph(cohort.diagnoses, cohort.vocabulary.occurrence, SimilarityParams())


def seed_msles(
    cohort: PreprocessedCohort, graph: PatientGraph, cfg: ModelConfig
) -> np.ndarray:
    needs_graph = cfg.gnn_kind != "none" and not cfg.dynamic
    g = graph if needs_graph else None
    out = []
    for seed in SEEDS:
        model = build_model(cohort, cfg, seed=seed)
        train_cfg = replace(EXPERIMENT_TRAIN, seed=seed)
        train(model, cohort, g, train_cfg)
        report, _ = evaluate_inductive(model, cohort, g, cohort.indices("test"), train_cfg)
        out.append(report["msle"])
    return np.asarray(out)


@pytest.fixture(scope="module")
def lstm_only(cohort: PreprocessedCohort, graph: PatientGraph) -> np.ndarray:
    return seed_msles(cohort, graph, ModelConfig(gnn_kind="none"))


@pytest.mark.parametrize("kind", ["sage", "gat", "mpnn"])
def test_graph_models_beat_lstm_on_los(
    cohort: PreprocessedCohort, graph: PatientGraph, lstm_only: np.ndarray, kind: str
) -> None:
    hybrid = seed_msles(cohort, graph, ModelConfig(gnn_kind=kind))
    assert hybrid.mean() <= 0.95 * lstm_only.mean()
    assert t_test(hybrid, lstm_only, paired=True).pvalue < 0.05


def test_graph_helps_without_diagnosis_encoder(
    cohort: PreprocessedCohort, graph: PatientGraph
) -> None:
    plain = seed_msles(cohort, graph, ModelConfig(gnn_kind="none", include_diagnoses_static=False))
    hybrid = seed_msles(cohort, graph, ModelConfig(gnn_kind="gcn", include_diagnoses_static=False))
    assert hybrid.mean() <= 0.95 * plain.mean()


def test_dynamic_graph_not_worse(cohort: PreprocessedCohort, graph: PatientGraph) -> None:
    plain = seed_msles(cohort, graph, ModelConfig(gnn_kind="none", include_diagnoses_static=False))
    dynamic = seed_msles(
        cohort,
        graph,
        ModelConfig(gnn_kind="gcn", dynamic=True, include_diagnoses_static=False),
    )
    assert dynamic.mean() <= 1.01 * plain.mean()


def test_no_model_beats_the_bayes_predictor(
    planted: SyntheticCohort, lstm_only: np.ndarray
) -> None:
    # the oracle is a population expectation; per-split estimates wobble around it
    assert lstm_only.min() >= 0.9 * oracle_best_msle(planted)


def test_experiments_use_the_default_budget() -> None:
    assert EXPERIMENT_TRAIN == TrainConfig()
    assert EXPERIMENT_TRAIN.max_epochs == 25
