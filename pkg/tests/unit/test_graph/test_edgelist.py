"""Tests for graph/edgelist.py."""

from pathlib import Path

import numpy as np
import pytest

from patientgraph.errors import DataError
from patientgraph.graph.edgelist import read_edge_list, write_edge_list
from patientgraph.graph.knn import PatientGraph
from patientgraph.graph.similarity import SimilarityParams


class TestEdgeList:
    def test_round_trip_is_exact(self, tmp_path: Path, small_graph: PatientGraph) -> None:
        path = tmp_path / "graph.edges"
        params = SimilarityParams(a=5.0, c=0.001, k=3)
        write_edge_list(small_graph, path, params)
        graph, read_params = read_edge_list(path)
        assert read_params == params
        assert graph.n_nodes == small_graph.n_nodes
        np.testing.assert_array_equal(graph.indptr, small_graph.indptr)
        np.testing.assert_array_equal(graph.indices, small_graph.indices)
        np.testing.assert_array_equal(graph.scores, small_graph.scores)

    def test_header(self, tmp_path: Path, small_graph: PatientGraph) -> None:
        path = tmp_path / "graph.edges"
        write_edge_list(small_graph, path, SimilarityParams())
        assert path.read_text().splitlines()[0] == f"{small_graph.n_nodes} 3 5.0 0.001"

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(FileNotFoundError):
            read_edge_list(tmp_path / "nope.edges")

    @pytest.mark.parametrize(
        "text",
        [
            "3 1 5.0\n",
            "3 1 5.0 0.001\n0 x 1.0\n",
            "2 1 5.0 0.001\n0 5 1.0\n",
            "2 1 5.0 0.001\n1 0 1.0\n0 1 1.0\n",
        ],
    )
    def test_malformed(self, tmp_path: Path, text: str) -> None:
        path = tmp_path / "bad.edges"
        path.write_text(text)
        with pytest.raises(DataError):
            read_edge_list(path)
