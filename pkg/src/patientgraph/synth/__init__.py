"""Planted-signal synthetic cohorts and their Bayes-oracle error."""

from patientgraph.synth.generator import (
    CohortSummary,
    LeafEffect,
    PatientTruth,
    SynthConfig,
    SyntheticCohort,
    build_hierarchy,
    generate,
    summarize,
    validate_synth_config,
    write_cohort,
)
from patientgraph.synth.oracle import log1p_moments, oracle_best_msle, oracle_predictions

__all__ = [
    "CohortSummary",
    "LeafEffect",
    "PatientTruth",
    "SynthConfig",
    "SyntheticCohort",
    "build_hierarchy",
    "generate",
    "log1p_moments",
    "oracle_best_msle",
    "oracle_predictions",
    "summarize",
    "validate_synth_config",
    "write_cohort",
]
