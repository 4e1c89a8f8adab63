"""
Run manifests: what a subcommand read, wrote and how long it took.

Every output file is listed with its sha256 so two runs from identical
inputs and seeds can be compared byte-for-byte. The manifest itself is not
hashed (it carries wall-clock timings).
"""

from __future__ import annotations

import hashlib
import json
import time
from collections.abc import Iterable, Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from patientgraph import __version__
from patientgraph.errors import DataError

MANIFEST_FILE = "manifest.json"
_CHUNK = 1 << 20


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(_CHUNK), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _hash_paths(paths: Iterable[Path]) -> dict[str, str]:
    out: dict[str, str] = {}
    for p in paths:
        if p.is_dir():
            for child in sorted(q for q in p.rglob("*") if q.is_file()):
                if child.name != MANIFEST_FILE:
                    out[str(child)] = sha256_file(child)
        elif p.exists():
            out[str(p)] = sha256_file(p)
    return out


@dataclass(slots=True)
class RunManifest:
    command: str
    config: str = ""
    seeds: dict[str, int] = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    version: str = __version__

    def add_inputs(self, paths: Iterable[Path]) -> None:
        self.inputs.update(_hash_paths(paths))

    def add_outputs(self, paths: Iterable[Path]) -> None:
        self.outputs.update(_hash_paths(paths))

    @contextmanager
    def timed(self, stage: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[stage] = round(time.perf_counter() - start, 6)

    def to_dict(self) -> dict[str, object]:
        return {
            "command": self.command,
            "version": self.version,
            "config": self.config,
            "seeds": dict(sorted(self.seeds.items())),
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": dict(sorted(self.outputs.items())),
            "timings": self.timings,
        }

    def write(self, out_dir: Path) -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / MANIFEST_FILE
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")
        return path


def read_manifest(path: Path) -> RunManifest:
    if not path.exists():
        raise FileNotFoundError(f"missing manifest: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        return RunManifest(
            command=str(raw["command"]),
            config=str(raw.get("config", "")),
            seeds={str(k): int(v) for k, v in raw.get("seeds", {}).items()},
            inputs=dict(raw.get("inputs", {})),
            outputs=dict(raw.get("outputs", {})),
            timings={str(k): float(v) for k, v in raw.get("timings", {}).items()},
            version=str(raw.get("version", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed manifest ({exc})") from exc
