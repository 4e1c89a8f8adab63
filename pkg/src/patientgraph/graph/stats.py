from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph

from patientgraph.graph.knn import PatientGraph


@dataclass(frozen=True, slots=True)
class GraphStats:
    n_nodes: int
    n_edges: int
    degree_histogram: dict[int, int]
    score_min: float
    score_max: float
    score_mean: float
    score_std: float
    n_components: int

    def lines(self) -> list[str]:
        hist = ", ".join(f"{deg}:{count}" for deg, count in self.degree_histogram.items())
        return [
            f"nodes       {self.n_nodes}",
            f"edges       {self.n_edges}",
            f"out-degree  {hist}",
            f"score       min {self.score_min:.6g}  max {self.score_max:.6g}  "
            f"mean {self.score_mean:.6g}  std {self.score_std:.6g}",
            f"components  {self.n_components} (weak)",
        ]


def graph_stats(graph: PatientGraph) -> GraphStats:
    """Degree histogram, score distribution and weakly connected component count."""
    degrees, counts = np.unique(graph.out_degree(), return_counts=True)
    scores = graph.scores
    has_edges = scores.size > 0
    n_comp, _ = csgraph.connected_components(graph.to_sparse(), directed=True, connection="weak")
    return GraphStats(
        n_nodes=graph.n_nodes,
        n_edges=graph.n_edges,
        degree_histogram={int(d): int(c) for d, c in zip(degrees, counts, strict=True)},
        score_min=float(scores.min()) if has_edges else 0.0,
        score_max=float(scores.max()) if has_edges else 0.0,
        score_mean=float(scores.mean()) if has_edges else 0.0,
        score_std=float(scores.std()) if has_edges else 0.0,
        n_components=int(n_comp),
    )
