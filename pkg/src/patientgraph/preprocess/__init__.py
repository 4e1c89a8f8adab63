"""Raw patient records to scaled static vectors, hourly series and multi-hot diagnoses."""

from patientgraph.preprocess.codes import CodePath, parse_code_path
from patientgraph.preprocess.diagnoses import DiagnosisMatrix, DiagnosisVocabulary, encode_diagnoses
from patientgraph.preprocess.pipeline import (
    PreprocessConfig,
    PreprocessedCohort,
    load_preprocessed,
    preprocess_cohort,
    save_preprocessed,
)
from patientgraph.preprocess.records import PatientRecord, read_cohort, write_cohort
from patientgraph.preprocess.scaling import FeatureScaler, apply_scaler, fit_scalers, unscale
from patientgraph.preprocess.split import CohortSplit, split_cohort
from patientgraph.preprocess.static import StaticLayout, encode_static
from patientgraph.preprocess.timeseries import resample_hourly

__all__ = [
    "CodePath",
    "CohortSplit",
    "DiagnosisMatrix",
    "DiagnosisVocabulary",
    "FeatureScaler",
    "PatientRecord",
    "PreprocessConfig",
    "PreprocessedCohort",
    "StaticLayout",
    "apply_scaler",
    "encode_diagnoses",
    "encode_static",
    "fit_scalers",
    "load_preprocessed",
    "parse_code_path",
    "preprocess_cohort",
    "read_cohort",
    "resample_hourly",
    "save_preprocessed",
    "split_cohort",
    "unscale",
    "write_cohort",
]
