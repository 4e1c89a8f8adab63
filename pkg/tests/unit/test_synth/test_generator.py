"""Tests for synth/generator.py."""

import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from patientgraph.errors import ConfigError
from patientgraph.graph import build_knn_graph
from patientgraph.preprocess import preprocess_cohort
from patientgraph.preprocess.records import read_cohort
from patientgraph.synth.generator import (
    EFFECTS_FILE,
    TRUTH_FILE,
    SynthConfig,
    SyntheticCohort,
    build_hierarchy,
    generate,
    summarize,
    write_cohort,
)


class TestHierarchy:
    def test_level_sizes_and_names(self, rng: np.random.Generator) -> None:
        leaves = build_hierarchy(12, 3, rng)
        assert len(set(leaves)) == 12
        assert all(p.depth == 3 for p in leaves)
        assert len({p.levels[:1] for p in leaves}) == 3
        assert len({p.levels[:2] for p in leaves}) == 6
        assert all(p.levels[0].startswith("grp") and p.levels[2].startswith("dx") for p in leaves)

    def test_flat_vocabulary(self, rng: np.random.Generator) -> None:
        leaves = build_hierarchy(5, 1, rng)
        assert [p.as_str for p in leaves] == ["dx00", "dx01", "dx02", "dx03", "dx04"]


class TestSynthConfig:
    @pytest.mark.parametrize(
        "overrides",
        [
            {"m_leaf": 2, "depth": 3},
            {"depth": 0},
            {"n_patients": 1},
            {"horizon": 0},
            {"los_noise": -0.1},
            {"mean_leaf_diagnoses": 0.5},
            {"los_baseline": -1.0, "los_effect_scale": 0.0},
        ],
    )
    def test_rejected(self, overrides: dict[str, float]) -> None:
        with pytest.raises(ConfigError):
            generate(replace(SynthConfig(n_patients=10), **overrides))

    def test_unreachable_stay_stops_redrawing(self) -> None:
        cfg = SynthConfig(
            n_patients=5, m_leaf=12, depth=3, los_baseline=-50.0, los_effect_scale=0.01
        )
        with pytest.raises(ConfigError, match="offsets los_baseline"):
            generate(cfg)


class TestGenerate:
    def test_shape_of_records(self, small_synth: SyntheticCohort) -> None:
        assert len(small_synth.records) == 60
        assert small_synth.records[0].patient_id == "p00"
        first = small_synth.records[0]
        assert sorted(first.series) == ["vital_0", "vital_1", "vital_2"]
        assert first.diagnoses
        assert {"age", "admission_weight", "hour_of_admission"} <= set(first.static_numeric)
        assert all(r.los >= 1.0 for r in small_synth.records)

    def test_files_are_byte_identical_for_a_seed(self, tmp_path: Path) -> None:
        cfg = SynthConfig(n_patients=25, m_leaf=9, n_channels=2, seed=4)
        a = write_cohort(generate(cfg), tmp_path / "a")
        b = write_cohort(generate(cfg), tmp_path / "b")
        for pa, pb in zip(a, b, strict=True):
            assert pa.read_bytes() == pb.read_bytes()

    def test_seeds_differ(self) -> None:
        cfg = SynthConfig(n_patients=10, m_leaf=9, n_channels=1)
        a = generate(cfg)
        b = generate(replace(cfg, seed=1))
        assert [r.los for r in a.records] != [r.los for r in b.records]

    def test_zero_noise_stay_is_exp_of_mu(self) -> None:
        cohort = generate(SynthConfig(n_patients=40, m_leaf=15, n_channels=1, los_noise=0.0))
        for rec, truth in zip(cohort.records, cohort.truth, strict=True):
            assert truth.los_mu >= 0.0
            assert rec.los == math.exp(truth.los_mu)

    def test_mortality_effect_is_twice_stay_effect(self, small_synth: SyntheticCohort) -> None:
        for e in small_synth.effects:
            assert e.ihm_effect == pytest.approx(2.0 * e.los_effect)

    def test_most_common_leaf_is_least_rare(self, small_synth: SyntheticCohort) -> None:
        top = max(small_synth.effects, key=lambda e: e.prevalence_weight)
        assert top.rarity == 0.0
        assert sum(e.prevalence_weight for e in small_synth.effects) == pytest.approx(1.0)

    def test_written_cohort_reads_back(self, tmp_path: Path, small_synth: SyntheticCohort) -> None:
        paths = write_cohort(small_synth, tmp_path)
        assert all(p.exists() for p in paths)
        records = read_cohort(tmp_path)
        assert [r.patient_id for r in records] == [r.patient_id for r in small_synth.records]
        truth = pd.read_csv(tmp_path / TRUTH_FILE)
        assert len(truth) == 60
        effects = pd.read_csv(tmp_path / EFFECTS_FILE)
        assert len(effects) == 12


class TestGraphInformativeness:
    def test_neighbours_share_a_diagnosis(self) -> None:
        cohort = preprocess_cohort(
            list(generate(SynthConfig(n_patients=300, series_signal=0.0, seed=3)).records)
        )
        graph = build_knn_graph(cohort.diagnoses, cohort.vocabulary.occurrence)
        src = np.repeat(np.arange(graph.n_nodes), graph.out_degree())
        d = cohort.diagnoses
        shared = np.asarray(d[src].multiply(d[graph.indices]).sum(axis=1)).ravel()
        assert np.mean(shared > 0) > 0.95


class TestSummarize:
    def test_long_tailed_prevalence(self) -> None:
        summary = summarize(generate(SynthConfig(n_patients=500, n_channels=1, seed=2)))
        assert summary.skew_ratio > 2.0
        assert summary.mean_diagnoses_per_patient >= 1.0

    def test_lines(self, small_synth: SyntheticCohort) -> None:
        lines = summarize(small_synth).lines()
        assert lines[0] == "patients: 60"
        assert lines[-1].startswith("mean los: ")
