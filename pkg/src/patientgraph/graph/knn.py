"""
Directed k-NN patient graphs.

Exact all-pairs scoring, evaluated in row blocks. Each node keeps its
min(k, N - 1) highest-scoring peers, no self edges. Scores are ranked after
rounding to RANK_DECIMALS so that sums computed in a different order still
tie; ties go to the smaller node index.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse
from scipy.spatial.distance import cdist

from patientgraph.errors import GraphError
from patientgraph.graph.similarity import SimilarityParams, diagnosis_weights, score_matrix_block

logger = logging.getLogger(__name__)

RANK_DECIMALS = 10
DEFAULT_BLOCK_ROWS = 512


@dataclass(frozen=True, slots=True, eq=False)
class PatientGraph:
    """CSR adjacency: out-neighbours of node i are indices[indptr[i]:indptr[i+1]]."""

    n_nodes: int
    k: int
    indptr: NDArray[np.int64]
    indices: NDArray[np.int64]
    scores: NDArray[np.float64]

    @property
    def n_edges(self) -> int:
        return int(self.indices.shape[0])

    def neighbors(self, i: int) -> NDArray[np.int64]:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def edge_scores(self, i: int) -> NDArray[np.float64]:
        return self.scores[self.indptr[i] : self.indptr[i + 1]]

    def out_degree(self) -> NDArray[np.int64]:
        return np.diff(self.indptr)

    def edges(self) -> Iterator[tuple[int, int, float]]:
        for i in range(self.n_nodes):
            for j, s in zip(self.neighbors(i), self.edge_scores(i), strict=True):
                yield i, int(j), float(s)

    def to_sparse(self) -> sparse.csr_matrix:
        return sparse.csr_matrix(
            (self.scores, self.indices, self.indptr), shape=(self.n_nodes, self.n_nodes)
        )


def _top_k(block: NDArray[np.float64], k: int) -> NDArray[np.int64]:
    """Column indices of the k largest entries per row; ties to the smaller index."""
    ranked = -np.round(block, RANK_DECIMALS)
    return np.argsort(ranked, axis=1, kind="stable")[:, :k].astype(np.int64)


def _assemble(n: int, k: int, nbrs: NDArray[np.int64], scores: NDArray[np.float64]) -> PatientGraph:
    per_node = nbrs.shape[1]
    return PatientGraph(
        n_nodes=n,
        k=k,
        indptr=np.arange(0, n * per_node + 1, per_node, dtype=np.int64),
        indices=nbrs.reshape(-1),
        scores=scores.reshape(-1),
    )


def build_knn_graph(
    diagnoses: sparse.spmatrix | ArrayLike,
    occurrence: ArrayLike,
    params: SimilarityParams | None = None,
    block_rows: int = DEFAULT_BLOCK_ROWS,
) -> PatientGraph:
    params = params or SimilarityParams()
    d = sparse.csr_matrix(diagnoses, dtype=np.float64)
    n = d.shape[0]
    if n < 2:
        raise GraphError(f"a k-NN graph needs at least 2 patients, got {n}")
    k_eff = min(params.k, n - 1)
    weights = diagnosis_weights(occurrence, params.a, params.c)
    totals = np.asarray(d.sum(axis=1)).ravel()

    nbrs = np.empty((n, k_eff), dtype=np.int64)
    scores = np.empty((n, k_eff))
    for start in range(0, n, block_rows):
        stop = min(start + block_rows, n)
        block = score_matrix_block(d, slice(start, stop), weights, totals)
        local = np.arange(stop - start)
        block[local, local + start] = -np.inf
        top = _top_k(block, k_eff)
        nbrs[start:stop] = top
        scores[start:stop] = np.take_along_axis(block, top, axis=1)

    graph = _assemble(n, k_eff, nbrs, scores)
    if params.symmetrize:
        graph = symmetrize(graph)
    logger.info(
        "built k-NN graph: %d nodes, %d edges (k=%d, a=%g, c=%g)",
        n,
        graph.n_edges,
        k_eff,
        params.a,
        params.c,
    )
    return graph


def dynamic_knn_from_embeddings(embeddings: ArrayLike, k: int) -> PatientGraph:
    """
    Per-batch k-NN by Euclidean distance between hidden vectors.

    Edge scores are negated distances, so larger still means closer.
    """
    h = np.asarray(embeddings, dtype=np.float64)
    if h.ndim != 2:
        raise GraphError(f"embeddings must be a 2-D batch, got shape {h.shape}")
    b = h.shape[0]
    if b < 2:
        raise GraphError(f"dynamic graph needs a batch of at least 2, got {b}")
    k_eff = min(k, b - 1)
    neg_dist = -cdist(h, h, metric="euclidean")
    np.fill_diagonal(neg_dist, -np.inf)
    top = _top_k(neg_dist, k_eff)
    return _assemble(b, k_eff, top, np.take_along_axis(neg_dist, top, axis=1))


def symmetrize(graph: PatientGraph) -> PatientGraph:
    """Union with reverse edges; per-node neighbours ordered by (-score, index)."""
    src = np.repeat(np.arange(graph.n_nodes, dtype=np.int64), graph.out_degree())
    all_src = np.concatenate([src, graph.indices])
    all_dst = np.concatenate([graph.indices, src])
    all_score = np.concatenate([graph.scores, graph.scores])
    order = np.lexsort((all_dst, -np.round(all_score, RANK_DECIMALS), all_src))
    all_src, all_dst, all_score = all_src[order], all_dst[order], all_score[order]
    pair = all_src * graph.n_nodes + all_dst
    _, first = np.unique(pair, return_index=True)
    keep = np.sort(first)
    all_src, all_dst, all_score = all_src[keep], all_dst[keep], all_score[keep]
    counts = np.bincount(all_src, minlength=graph.n_nodes)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return PatientGraph(graph.n_nodes, graph.k, indptr, all_dst, all_score)
