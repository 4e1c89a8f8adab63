"""Diagnosis-similarity scoring and k-NN patient graphs."""

from patientgraph.graph.blocks import Block, full_block
from patientgraph.graph.edgelist import read_edge_list, write_edge_list
from patientgraph.graph.knn import (
    PatientGraph,
    build_knn_graph,
    dynamic_knn_from_embeddings,
    symmetrize,
)
from patientgraph.graph.similarity import SimilarityParams, score_matrix_block, similarity_score
from patientgraph.graph.stats import GraphStats, graph_stats

__all__ = [
    "Block",
    "GraphStats",
    "PatientGraph",
    "SimilarityParams",
    "build_knn_graph",
    "dynamic_knn_from_embeddings",
    "full_block",
    "graph_stats",
    "read_edge_list",
    "score_matrix_block",
    "similarity_score",
    "symmetrize",
    "write_edge_list",
]
