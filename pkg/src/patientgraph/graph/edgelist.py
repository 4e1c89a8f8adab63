"""
Edge-list persistence.

    <N> <k> <a> <c>
    <src> <dst> <score>
    ...

Scores are written with repr() so they read back bit-identical.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from patientgraph.errors import DataError
from patientgraph.graph.knn import PatientGraph
from patientgraph.graph.similarity import SimilarityParams

logger = logging.getLogger(__name__)


def write_edge_list(graph: PatientGraph, path: Path, params: SimilarityParams) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"{graph.n_nodes} {graph.k} {params.a!r} {params.c!r}\n")
        for src, dst, score in graph.edges():
            fh.write(f"{src} {dst} {score!r}\n")
    logger.info("wrote %d edges to %s", graph.n_edges, path)


def read_edge_list(path: Path) -> tuple[PatientGraph, SimilarityParams]:
    if not path.exists():
        raise FileNotFoundError(f"missing edge list: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    try:
        n_raw, k_raw, a_raw, c_raw = lines[0].split()
        n, k = int(n_raw), int(k_raw)
        params = SimilarityParams(a=float(a_raw), c=float(c_raw), k=max(k, 1))
        rows = [ln.split() for ln in lines[1:] if ln.strip()]
        src = np.array([int(r[0]) for r in rows], dtype=np.int64)
        dst = np.array([int(r[1]) for r in rows], dtype=np.int64)
        scores = np.array([float(r[2]) for r in rows], dtype=np.float64)
    except (IndexError, ValueError) as exc:
        raise DataError(f"{path.name}: malformed edge list ({exc})") from exc
    if src.size and (src.min() < 0 or max(src.max(), dst.max()) >= n or dst.min() < 0):
        raise DataError(f"{path.name}: node id outside [0, {n})")
    if np.any(np.diff(src) < 0):
        raise DataError(f"{path.name}: edges must be grouped by source node")
    counts = np.bincount(src, minlength=n)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return PatientGraph(n, k, indptr, dst, scores), params
