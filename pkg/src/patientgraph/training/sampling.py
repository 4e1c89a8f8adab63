"""
Fixed-size neighbourhood sampling for inductive mini-batches.

For each node in the current frontier, S neighbours are drawn uniformly with
replacement from its out-neighbours that lie in the allowed pool. A node
with no pool neighbours gets none and aggregates over itself only. Sampling
depth L yields L blocks; node order is targets first, then each hop's newly
reached nodes, so every block's destinations are a prefix of its sources.

Pools: training batches see train nodes only, validation sees train + val,
evaluation sees every node.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Collection, Iterable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from patientgraph.graph.blocks import Block
from patientgraph.graph.knn import PatientGraph

IntArray = NDArray[np.int64]
BoolArray = NDArray[np.bool_]


@dataclass(frozen=True, slots=True, eq=False)
class Batch:
    targets: IntArray
    nodes: IntArray
    blocks: tuple[Block, ...]

    @property
    def n_targets(self) -> int:
        return int(self.targets.shape[0])


@dataclass(slots=True)
class SamplingMonitor:
    """Counts every node id that entered a batch and every id that was scored."""

    sampled: Counter[int] = field(default_factory=Counter)
    evaluated: list[int] = field(default_factory=list)

    def record_sampled(self, ids: Iterable[int]) -> None:
        self.sampled.update(int(i) for i in ids)

    def record_evaluated(self, ids: Iterable[int]) -> None:
        self.evaluated.extend(int(i) for i in ids)

    @property
    def sampled_ids(self) -> set[int]:
        return set(self.sampled)

    @property
    def evaluated_ids(self) -> set[int]:
        return set(self.evaluated)

    def reset(self) -> None:
        self.sampled.clear()
        self.evaluated.clear()


def pool_mask(n_nodes: int, ids: Collection[int] | ArrayLike | None) -> BoolArray:
    """Boolean membership mask; None means every node."""
    if ids is None:
        return np.ones(n_nodes, dtype=np.bool_)
    mask = np.zeros(n_nodes, dtype=np.bool_)
    mask[np.asarray(list(ids) if isinstance(ids, (set, frozenset)) else ids, dtype=np.int64)] = True
    return mask


def sample_neighborhood(
    graph: PatientGraph,
    targets: ArrayLike,
    sample_size: int,
    pool: BoolArray,
    rng: np.random.Generator,
    depth: int = 1,
    monitor: SamplingMonitor | None = None,
) -> Batch:
    tgt = np.asarray(targets, dtype=np.int64)
    nodes: list[int] = [int(t) for t in tgt]
    position = {g: i for i, g in enumerate(nodes)}
    blocks: list[Block] = []
    frontier = len(nodes)
    for _ in range(depth):
        src: list[int] = []
        dst: list[int] = []
        scores: list[float] = []
        for local, g in enumerate(nodes[:frontier]):
            nbrs = graph.neighbors(g)
            keep = pool[nbrs]
            cands = nbrs[keep]
            if sample_size == 0 or cands.size == 0:
                continue
            cand_scores = graph.edge_scores(g)[keep]
            picks = rng.integers(0, cands.size, size=sample_size)
            for j, s in zip(cands[picks], cand_scores[picks], strict=True):
                gj = int(j)
                if gj not in position:
                    position[gj] = len(nodes)
                    nodes.append(gj)
                src.append(position[gj])
                dst.append(local)
                scores.append(float(s))
        blocks.append(
            Block(
                n_dst=frontier,
                n_src=len(nodes),
                src=np.asarray(src, dtype=np.int64),
                dst=np.asarray(dst, dtype=np.int64),
                scores=np.asarray(scores, dtype=np.float64),
            )
        )
        frontier = len(nodes)
    node_arr = np.asarray(nodes, dtype=np.int64)
    if monitor is not None:
        monitor.record_sampled(node_arr)
    return Batch(targets=tgt, nodes=node_arr, blocks=tuple(blocks))


def make_batches(
    ids: ArrayLike,
    batch_size: int,
    rng: np.random.Generator | None = None,
) -> list[IntArray]:
    """
    Split ids into batches, shuffled when rng is given. A trailing batch of one
    is folded into the previous batch so per-batch graphs always have 2+ nodes.
    """
    arr = np.asarray(ids, dtype=np.int64)
    if rng is not None:
        arr = arr[rng.permutation(arr.size)]
    batches = [arr[i : i + batch_size] for i in range(0, arr.size, batch_size)]
    if len(batches) > 1 and batches[-1].size == 1:
        tail = batches.pop()
        batches[-1] = np.concatenate([batches[-1], tail])
    return batches
