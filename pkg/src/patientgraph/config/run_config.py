"""
Run configuration: one flat key=value file for every tunable.

Format:
    # comment
    gnn_kind = gat
    learning_rate = 0.0005
    split_ratios = 0.7, 0.15, 0.15

Keys are the field names of ModelConfig, TrainConfig, SimilarityParams and
PreprocessConfig (the names are disjoint). Values are parsed by the field's
declared type. SynthConfig files use the same format.

Environment:
    PATIENTGRAPH_WORKDIR   base directory for relative paths (paths only)
"""

from __future__ import annotations

import dataclasses
import os
import typing
from collections.abc import Mapping
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Literal, TypeVar

from patientgraph.errors import ConfigError
from patientgraph.graph.similarity import SimilarityParams
from patientgraph.models.lstm_gnn import ModelConfig, validate_model_config
from patientgraph.preprocess.pipeline import PreprocessConfig, validate_preprocess_config
from patientgraph.synth.generator import SynthConfig, validate_synth_config
from patientgraph.training.trainer import TrainConfig, validate_train_config

WORKDIR_ENV = "PATIENTGRAPH_WORKDIR"
SNAPSHOT_FILE = "run.cfg"

T = TypeVar("T")


@dataclass(frozen=True, slots=True)
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    similarity: SimilarityParams = field(default_factory=SimilarityParams)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)

    def sections(self) -> tuple[object, ...]:
        return (self.model, self.train, self.similarity, self.preprocess)


def validate_run_config(cfg: RunConfig) -> None:
    validate_model_config(cfg.model)
    validate_train_config(cfg.train)
    validate_preprocess_config(cfg.preprocess)


def resolve_path(path: str | Path) -> Path:
    """Absolute paths pass through; relative ones hang off PATIENTGRAPH_WORKDIR if set."""
    p = Path(path)
    base = os.environ.get(WORKDIR_ENV)
    if p.is_absolute() or not base:
        return p
    return Path(base) / p


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse_pairs(text: str, source: str = "<config>") -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw.strip()!r}")
        if key in pairs:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        pairs[key] = value.strip()
    return pairs


def parse_value(key: str, text: str, hint: Any) -> Any:
    origin = typing.get_origin(hint)
    try:
        if hint is bool:
            lowered = text.lower()
            if lowered not in ("true", "false"):
                raise ValueError("expected true or false")
            return lowered == "true"
        if hint is int:
            return int(text)
        if hint is float:
            return float(text)
        if hint is str:
            return text
        if origin is Literal:
            allowed = typing.get_args(hint)
            if text not in allowed:
                raise ValueError(f"expected one of {', '.join(map(str, allowed))}")
            return text
        if origin is tuple:
            items = [item.strip() for item in text.split(",") if item.strip()]
            args = typing.get_args(hint)
            if len(args) != len(items) and not (len(args) == 2 and args[1] is Ellipsis):
                raise ValueError(f"expected {len(args)} comma-separated values")
            return tuple(float(item) for item in items)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {text!r}: {exc}") from exc
    raise ConfigError(f"{key}: unsupported field type {hint!r}")


def _apply(obj: T, pairs: Mapping[str, str], used: set[str]) -> T:
    hints = typing.get_type_hints(type(obj))
    updates: dict[str, Any] = {}
    for f in fields(typing.cast(Any, obj)):
        if f.name in pairs:
            updates[f.name] = parse_value(f.name, pairs[f.name], hints[f.name])
            used.add(f.name)
    if not updates:
        return obj
    return typing.cast(T, replace(typing.cast(Any, obj), **updates))


def run_config_from_pairs(pairs: Mapping[str, str], base: RunConfig | None = None) -> RunConfig:
    base = base or RunConfig()
    used: set[str] = set()
    cfg = RunConfig(
        model=_apply(base.model, pairs, used),
        train=_apply(base.train, pairs, used),
        similarity=_apply(base.similarity, pairs, used),
        preprocess=_apply(base.preprocess, pairs, used),
    )
    unknown = sorted(set(pairs) - used)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    validate_run_config(cfg)
    return cfg


def load_run_config(path: Path | None, base: RunConfig | None = None) -> RunConfig:
    if path is None:
        cfg = base or RunConfig()
        validate_run_config(cfg)
        return cfg
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    return run_config_from_pairs(parse_pairs(path.read_text(), str(path)), base)


def load_synth_config(path: Path | None, **overrides: Any) -> SynthConfig:
    cfg = SynthConfig()
    if path is not None:
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        pairs = parse_pairs(path.read_text(), str(path))
        used: set[str] = set()
        cfg = _apply(cfg, pairs, used)
        unknown = sorted(set(pairs) - used)
        if unknown:
            raise ConfigError(f"unknown synth configuration keys: {', '.join(unknown)}")
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    validate_synth_config(cfg)
    return cfg


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------


def format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(format_value(v) for v in value)
    return str(value)


def format_config(*sections: object) -> str:
    lines: list[str] = []
    for section in sections:
        if not dataclasses.is_dataclass(section):
            raise TypeError(f"not a configuration dataclass: {section!r}")
        lines.append(f"# {type(section).__name__}")
        lines.extend(
            f"{f.name} = {format_value(getattr(section, f.name))}" for f in fields(section)
        )
        lines.append("")
    return "\n".join(lines)


def write_run_config(cfg: RunConfig, out_dir: Path) -> Path:
    """Snapshot the run configuration as run.cfg; load_run_config() reads it back."""
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / SNAPSHOT_FILE
    path.write_text(format_config(*cfg.sections()))
    return path
