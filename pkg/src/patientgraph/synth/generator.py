"""
Planted-signal synthetic cohorts.

Structure:
    - a random code hierarchy with m_leaf leaves; every internal code has at
      least one child
    - leaf prevalence follows a power law over a random ranking of leaves,
      so a few diagnoses are common and most are rare
    - each leaf carries a latent additive LOS effect whose spread grows with
      rarity, and a mortality effect proportional to it
    - LOS = exp(los_baseline + sum of effects + los_noise * z), floored at
      one day; IHM ~ Bernoulli(sigmoid(ihm_baseline + sum of IHM effects))
    - hourly vitals carry the patient's severity (series_signal) buried in
      patient-level and hourly noise, so the per-patient encoder sees the
      outcome only weakly and neighbours sharing rare diagnoses add signal

Every draw comes from one numpy Generator seeded by SynthConfig.seed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from scipy import special

from patientgraph.errors import ConfigError
from patientgraph.preprocess.codes import CodePath
from patientgraph.preprocess.records import DiagnosisEntry, PatientRecord
from patientgraph.preprocess.records import write_cohort as write_records
from patientgraph.validation import require_non_negative, require_positive

logger = logging.getLogger(__name__)

TRUTH_FILE = "truth.csv"
EFFECTS_FILE = "effects.csv"

AGE_CAP = 90.0  # ages above 89 are recorded as 90 with age_over_89 set
IHM_EFFECT_RATIO = 2.0
UNIT_TYPES = ("cardiac", "medical", "neuro", "surgical")
MAX_LOS_REDRAWS = 1000


@dataclass(frozen=True, slots=True)
class SynthConfig:
    n_patients: int = 2000
    m_leaf: int = 120
    depth: int = 3
    prevalence_exponent: float = 1.5
    mean_leaf_diagnoses: float = 2.5
    los_effect_scale: float = 0.6
    rare_effect_boost: float = 1.5
    n_channels: int = 6
    horizon: int = 24
    los_baseline: float = 1.2
    los_noise: float = 0.25
    series_signal: float = 1.0
    series_patient_noise: float = 0.8
    series_hourly_noise: float = 0.2
    ihm_baseline: float = -2.5
    seed: int = 0


def validate_synth_config(cfg: SynthConfig) -> None:
    if cfg.depth < 1:
        raise ConfigError(f"hierarchy depth must be >= 1, got {cfg.depth}")
    if cfg.m_leaf < cfg.depth:
        raise ConfigError(f"m_leaf ({cfg.m_leaf}) must be at least the depth ({cfg.depth})")
    if cfg.n_patients < 2:
        raise ConfigError(f"n_patients must be >= 2, got {cfg.n_patients}")
    if cfg.n_channels < 1 or cfg.horizon < 1:
        raise ConfigError("n_channels and horizon must be positive")
    try:
        require_positive(cfg.prevalence_exponent, "prevalence_exponent")
        if cfg.mean_leaf_diagnoses < 1:
            raise ValueError(f"'mean_leaf_diagnoses' must be >= 1, got {cfg.mean_leaf_diagnoses}")
        for name in (
            "los_effect_scale",
            "rare_effect_boost",
            "los_noise",
            "series_signal",
            "series_patient_noise",
            "series_hourly_noise",
        ):
            require_non_negative(getattr(cfg, name), name)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.los_baseline < 0.0 and cfg.los_effect_scale == 0.0:
        raise ConfigError(
            f"los_baseline {cfg.los_baseline} < 0 with no diagnosis effects: "
            "no patient can reach a non-negative log stay"
        )


@dataclass(frozen=True, slots=True)
class LeafEffect:
    code: CodePath
    prevalence_weight: float
    rarity: float
    los_effect: float
    ihm_effect: float


@dataclass(frozen=True, slots=True)
class PatientTruth:
    patient_id: str
    los_mu: float  # los_baseline + sum of leaf LOS effects
    ihm_prob: float
    severity: float  # sum of leaf LOS effects


@dataclass(frozen=True, slots=True)
class SyntheticCohort:
    config: SynthConfig
    records: tuple[PatientRecord, ...]
    truth: tuple[PatientTruth, ...]
    effects: tuple[LeafEffect, ...]


# ---------------------------------------------------------------------------
# Hierarchy and effects
# ---------------------------------------------------------------------------


def _level_sizes(m_leaf: int, depth: int) -> list[int]:
    sizes = [math.ceil(m_leaf ** (level / depth) - 1e-9) for level in range(1, depth + 1)]
    sizes[-1] = m_leaf
    for i in range(1, depth):
        sizes[i] = max(sizes[i], sizes[i - 1])
    return sizes


def _level_name(level: int, depth: int) -> str:
    if level == depth:
        return "dx"
    return "grp" if level == 1 else f"sub{level}"


def build_hierarchy(m_leaf: int, depth: int, rng: np.random.Generator) -> list[CodePath]:
    """Leaf code paths; every internal node has at least one child."""
    sizes = _level_sizes(m_leaf, depth)
    paths = [CodePath((f"{_level_name(1, depth)}{i:02d}",)) for i in range(sizes[0])]
    for level in range(2, depth + 1):
        n_parent, n_child = sizes[level - 2], sizes[level - 1]
        parents = np.concatenate(
            [np.arange(n_parent), rng.integers(0, n_parent, size=n_child - n_parent)]
        )
        rng.shuffle(parents)
        name = _level_name(level, depth)
        paths = [
            CodePath(paths[int(p)].levels + (f"{name}{i:03d}",)) for i, p in enumerate(parents)
        ]
    return paths


def _leaf_effects(
    leaves: list[CodePath], cfg: SynthConfig, rng: np.random.Generator
) -> list[LeafEffect]:
    m = len(leaves)
    ranks = rng.permutation(m) + 1
    weights = ranks.astype(np.float64) ** (-cfg.prevalence_exponent)
    weights /= weights.sum()
    rarity = (ranks - 1) / max(m - 1, 1)
    base = rng.normal(0.0, 1.0, size=m)
    los = cfg.los_effect_scale * base * (1.0 + cfg.rare_effect_boost * rarity)
    return [
        LeafEffect(
            code=leaves[i],
            prevalence_weight=float(weights[i]),
            rarity=float(rarity[i]),
            los_effect=float(los[i]),
            ihm_effect=float(IHM_EFFECT_RATIO * los[i]),
        )
        for i in range(m)
    ]


# ---------------------------------------------------------------------------
# Patients
# ---------------------------------------------------------------------------


def _draw_leaves(
    weights: NDArray[np.float64], mean_count: float, rng: np.random.Generator
) -> NDArray[np.int64]:
    count = 1 + int(rng.poisson(mean_count - 1.0))
    count = min(count, weights.size)
    return np.sort(rng.choice(weights.size, size=count, replace=False, p=weights))


def _draw_series(
    severity: float,
    loadings: NDArray[np.float64],
    cfg: SynthConfig,
    rng: np.random.Generator,
) -> dict[str, tuple[tuple[float, float], ...]]:
    series: dict[str, tuple[tuple[float, float], ...]] = {}
    for j, w in enumerate(loadings):
        level = cfg.series_signal * w * severity + cfg.series_patient_noise * rng.normal()
        n_obs = int(rng.integers(4, 3 * cfg.horizon // 2 + 1))
        times = np.unique(np.round(rng.uniform(0.0, cfg.horizon, size=n_obs), 2))
        values = level + cfg.series_hourly_noise * rng.normal(size=times.size)
        series[f"vital_{j}"] = tuple(
            (float(t), float(round(v, 6))) for t, v in zip(times, values, strict=True)
        )
    return series


def _static_features(
    rng: np.random.Generator,
) -> tuple[dict[str, float], dict[str, str], dict[str, int]]:
    age = float(np.clip(rng.normal(64.0, 16.0), 18.0, 100.0))
    over = age > 89.0
    weight = float(round(rng.normal(80.0, 18.0), 1)) if rng.random() > 0.05 else math.nan
    numeric = {
        "age": AGE_CAP if over else float(round(age)),
        "admission_weight": weight,
        "admission_height": float(round(rng.normal(170.0, 10.0), 1)),
        "hour_of_admission": float(rng.integers(0, 24)),
    }
    categorical = {
        "gender": "female" if rng.random() < 0.46 else "male",
        "unit_type": UNIT_TYPES[int(rng.integers(0, len(UNIT_TYPES)))],
    }
    binary = {"age_over_89": int(over), "emergency_admission": int(rng.random() < 0.6)}
    return numeric, categorical, binary


def generate(cfg: SynthConfig | None = None) -> SyntheticCohort:
    cfg = cfg or SynthConfig()
    validate_synth_config(cfg)
    rng = np.random.default_rng(cfg.seed)
    leaves = build_hierarchy(cfg.m_leaf, cfg.depth, rng)
    effects = _leaf_effects(leaves, cfg, rng)
    weights = np.array([e.prevalence_weight for e in effects])
    los_eff = np.array([e.los_effect for e in effects])
    ihm_eff = np.array([e.ihm_effect for e in effects])
    loadings = rng.normal(0.0, 1.0, size=cfg.n_channels)
    width = len(str(cfg.n_patients))

    records: list[PatientRecord] = []
    truth: list[PatientTruth] = []
    for p in range(cfg.n_patients):
        pid = f"p{p:0{width}d}"
        chosen = _draw_leaves(weights, cfg.mean_leaf_diagnoses, rng)
        redraws = 0
        while cfg.los_baseline + los_eff[chosen].sum() < 0.0:
            redraws += 1
            if redraws > MAX_LOS_REDRAWS:
                raise ConfigError(
                    f"patient {pid}: no diagnosis draw in {MAX_LOS_REDRAWS} attempts offsets "
                    f"los_baseline {cfg.los_baseline}; raise los_baseline or los_effect_scale"
                )
            chosen = _draw_leaves(weights, cfg.mean_leaf_diagnoses, rng)
        severity = float(los_eff[chosen].sum())
        mu = cfg.los_baseline + severity
        los = max(1.0, math.exp(mu + cfg.los_noise * rng.normal()))
        prob = float(special.expit(cfg.ihm_baseline + ihm_eff[chosen].sum()))
        ihm = int(rng.random() < prob)
        hours = np.round(rng.uniform(0.0, cfg.horizon, size=chosen.size), 2)
        diagnoses = tuple(
            DiagnosisEntry(path=leaves[int(i)], hour=float(h))
            for i, h in zip(chosen, hours, strict=True)
        )
        numeric, categorical, binary = _static_features(rng)
        records.append(
            PatientRecord(
                patient_id=pid,
                static_numeric=numeric,
                static_categorical=categorical,
                static_binary=binary,
                diagnoses=diagnoses,
                series=_draw_series(severity, loadings, cfg, rng),
                ihm=ihm,
                los=los,
            )
        )
        truth.append(PatientTruth(pid, mu, prob, severity))

    logger.info(
        "generated %d patients over %d leaf diagnoses (seed %d)",
        cfg.n_patients,
        cfg.m_leaf,
        cfg.seed,
    )
    return SyntheticCohort(cfg, tuple(records), tuple(truth), tuple(effects))


def write_cohort(cohort: SyntheticCohort, out_dir: Path) -> list[Path]:
    """Ingestion files plus truth.csv and effects.csv; returns every file written."""
    write_records(cohort.records, out_dir)
    pd.DataFrame(
        [(t.patient_id, t.los_mu, t.ihm_prob, t.severity) for t in cohort.truth],
        columns=["patient_id", "los_mu", "ihm_prob", "severity"],
    ).to_csv(out_dir / TRUTH_FILE, index=False)
    pd.DataFrame(
        [
            (e.code.as_str, e.prevalence_weight, e.rarity, e.los_effect, e.ihm_effect)
            for e in cohort.effects
        ],
        columns=["code", "prevalence_weight", "rarity", "los_effect", "ihm_effect"],
    ).to_csv(out_dir / EFFECTS_FILE, index=False)
    return [
        out_dir / name
        for name in ("patients.csv", "diagnoses.csv", "timeseries.csv", TRUTH_FILE, EFFECTS_FILE)
    ]


@dataclass(frozen=True, slots=True)
class CohortSummary:
    n_patients: int
    n_codes_used: int
    mean_patients_per_diagnosis: float
    median_patients_per_diagnosis: float
    skew_ratio: float  # mean / median; > 1 for a long right tail
    mean_diagnoses_per_patient: float
    ihm_rate: float
    mean_los: float

    def lines(self) -> list[str]:
        return [
            f"patients: {self.n_patients}",
            f"leaf diagnoses used: {self.n_codes_used}",
            f"patients per diagnosis: mean {self.mean_patients_per_diagnosis:.2f}"
            f" median {self.median_patients_per_diagnosis:.2f}"
            f" (skew ratio {self.skew_ratio:.2f})",
            f"diagnoses per patient: {self.mean_diagnoses_per_patient:.2f}",
            f"ihm rate: {self.ihm_rate:.4f}",
            f"mean los: {self.mean_los:.3f}",
        ]


def summarize(cohort: SyntheticCohort) -> CohortSummary:
    """Prevalence shape of the leaf diagnoses actually assigned."""
    counts: dict[CodePath, int] = {}
    for rec in cohort.records:
        for entry in rec.diagnoses:
            counts[entry.path] = counts.get(entry.path, 0) + 1
    per_code = np.array(sorted(counts.values()), dtype=np.float64)
    mean = float(per_code.mean())
    median = float(np.median(per_code))
    n = len(cohort.records)
    return CohortSummary(
        n_patients=n,
        n_codes_used=len(counts),
        mean_patients_per_diagnosis=mean,
        median_patients_per_diagnosis=median,
        skew_ratio=mean / median,
        mean_diagnoses_per_patient=float(per_code.sum()) / n,
        ihm_rate=float(np.mean([r.ihm for r in cohort.records])),
        mean_los=float(np.mean([r.los for r in cohort.records])),
    )
