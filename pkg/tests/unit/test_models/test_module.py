"""Tests for models/module.py."""

import numpy as np
import pytest

from patientgraph.errors import DataError, DimensionError
from patientgraph.models.lstm_gnn import LSTMGNN, ModelConfig
from patientgraph.models.module import Linear


def build(seed: int) -> LSTMGNN:
    cfg = ModelConfig(gnn_kind="gat", lstm_hidden=4, gnn_hidden=4, gnn_out=4)
    return LSTMGNN(cfg, series_dim=3, horizon=5, static_dim=2, rng=np.random.default_rng(seed))


class TestParameters:
    def test_names_are_stable(self) -> None:
        assert list(build(0).state_dict()) == list(build(1).state_dict())

    def test_same_seed_same_values(self) -> None:
        a, b = build(3).state_dict(), build(3).state_dict()
        for name in a:
            np.testing.assert_array_equal(a[name], b[name])

    def test_names_are_dotted_paths(self) -> None:
        names = list(build(0).state_dict())
        assert names[0] == "lstm.fwd0.w"
        assert "gnn.layer0.att_src" in names
        assert names[-1] == "lstm_head.bias"

    def test_init_bounds(self, rng: np.random.Generator) -> None:
        layer = Linear(16, 3, rng)
        assert np.abs(layer.weight.data).max() <= 0.25


class TestStateDict:
    def test_round_trip(self) -> None:
        src, dst = build(0), build(1)
        dst.load_state_dict(src.state_dict())
        for name, value in src.state_dict().items():
            np.testing.assert_array_equal(dst.state_dict()[name], value)

    def test_state_is_a_copy(self) -> None:
        model = build(0)
        state = model.state_dict()
        state["lstm_head.bias"][...] = 99.0
        assert model.lstm_head.bias.data[0] != 99.0

    def test_missing_and_unexpected(self) -> None:
        model = build(0)
        state = model.state_dict()
        state.pop("lstm_head.bias")
        state["extra"] = np.zeros(1)
        with pytest.raises(DataError, match="lstm_head.bias.*extra"):
            model.load_state_dict(state)

    def test_shape_mismatch(self) -> None:
        model = build(0)
        state = model.state_dict()
        state["lstm_head.bias"] = np.zeros(2)
        with pytest.raises(DimensionError, match="lstm_head.bias"):
            model.load_state_dict(state)

    def test_zero_grad(self) -> None:
        layer = Linear(2, 1, np.random.default_rng(0))
        layer.weight.grad = np.ones((2, 1))
        layer.zero_grad()
        assert layer.weight.grad is None or not layer.weight.grad.any()
