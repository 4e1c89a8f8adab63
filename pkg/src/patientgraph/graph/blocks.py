from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from patientgraph.graph.knn import PatientGraph


@dataclass(frozen=True, slots=True, eq=False)
class Block:
    """
    One message-passing hop in local node indices.

    Source nodes are 0..n_src-1 and the destination nodes are the prefix
    0..n_dst-1 of them, so row i of a destination output and row i of the
    source input describe the same patient. Edge e carries a message from
    src[e] to dst[e] with edge score scores[e].
    """

    n_dst: int
    n_src: int
    src: NDArray[np.int64]
    dst: NDArray[np.int64]
    scores: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        if self.n_dst > self.n_src:
            raise ValueError(f"block has {self.n_dst} destinations but only {self.n_src} sources")
        if self.src.shape != self.dst.shape:
            raise ValueError("block src and dst differ in length")
        if self.src.size and (self.src.max() >= self.n_src or self.dst.max() >= self.n_dst):
            raise IndexError("block edge endpoint outside the local node range")

    @property
    def n_edges(self) -> int:
        return int(self.src.shape[0])

    def in_degree(self) -> NDArray[np.float64]:
        return np.bincount(self.dst, minlength=self.n_dst).astype(np.float64)


def full_block(graph: PatientGraph) -> Block:
    """Every edge of the graph as a single hop over all nodes (messages flow dst <- src)."""
    owners = np.repeat(np.arange(graph.n_nodes, dtype=np.int64), graph.out_degree())
    return Block(
        n_dst=graph.n_nodes,
        n_src=graph.n_nodes,
        src=graph.indices.astype(np.int64),
        dst=owners,
        scores=graph.scores.copy(),
    )
