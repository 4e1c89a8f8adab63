"""
Tests for models/lstm.py.

The oracle steps a scalar LSTM cell by hand with the same gate order
(input, forget, candidate, output).
"""

import math

import numpy as np
import pytest

from patientgraph.errors import ContractError
from patientgraph.models.lstm import BiLSTM, LSTMCell, bilstm_encode


def sig(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def hand_step(
    x: float, h: float, c: float, w: list[float], u: list[float], b: list[float]
) -> tuple[float, float]:
    z = [x * w[k] + h * u[k] + b[k] for k in range(4)]
    c_next = sig(z[1]) * c + sig(z[0]) * math.tanh(z[2])
    return sig(z[3]) * math.tanh(c_next), c_next


def set_cell(cell: LSTMCell, w: list[float], u: list[float], b: list[float]) -> None:
    cell.w.data[...] = np.array([w])
    cell.u.data[...] = np.array([u])
    cell.b.data[...] = np.array(b)


class TestLSTMCell:
    def test_weights_scaled_by_their_own_fan_in(self, rng: np.random.Generator) -> None:
        cell = LSTMCell(in_dim=100, hidden=4, rng=rng)
        assert np.abs(cell.w.data).max() <= 0.1
        assert np.abs(cell.w.data).max() > 0.05
        assert np.abs(cell.u.data).max() <= 0.5
        assert np.abs(cell.u.data).max() > 0.1


class TestBiLSTM:
    def test_output_width(self, rng: np.random.Generator) -> None:
        lstm = BiLSTM(in_dim=5, hidden=7, layers=2, rng=rng)
        h = lstm.encode(rng.normal(size=(3, 6, 5)))
        assert h.shape == (3, 14)
        assert lstm.out_dim == 14

    def test_functional_form_matches_method(self, rng: np.random.Generator) -> None:
        lstm = BiLSTM(in_dim=2, hidden=3, layers=1, rng=rng)
        x = rng.normal(size=(4, 5, 2))
        np.testing.assert_array_equal(bilstm_encode(lstm, x).data, lstm.encode(x).data)

    def test_zero_length_series(self, rng: np.random.Generator) -> None:
        lstm = BiLSTM(in_dim=2, hidden=3, layers=1, rng=rng)
        with pytest.raises(ContractError):
            lstm.encode(np.zeros((4, 0, 2)))

    def test_single_step_directions_agree(self, rng: np.random.Generator) -> None:
        lstm = BiLSTM(in_dim=2, hidden=3, layers=1, rng=rng)
        lstm.backward_cells[0].load_state_dict(lstm.forward_cells[0].state_dict())
        h = lstm.encode(rng.normal(size=(4, 1, 2))).data
        np.testing.assert_array_equal(h[:, :3], h[:, 3:])

    def test_hand_stepped_scalar_cell(self, rng: np.random.Generator) -> None:
        lstm = BiLSTM(in_dim=1, hidden=1, layers=1, rng=rng)
        fw = ([0.5, -0.3, 0.8, 0.1], [0.2, 0.4, -0.6, 0.3], [0.0, 1.0, 0.0, 0.0])
        bw = ([-0.2, 0.7, 0.5, 0.9], [0.1, -0.1, 0.3, 0.2], [0.1, 0.0, -0.1, 0.0])
        set_cell(lstm.forward_cells[0], *fw)
        set_cell(lstm.backward_cells[0], *bw)
        xs = [1.5, -0.5]

        h, c = 0.0, 0.0
        for x in xs:
            h, c = hand_step(x, h, c, *fw)
        h_fwd = h
        h, c = 0.0, 0.0
        for x in reversed(xs):
            h, c = hand_step(x, h, c, *bw)
        h_bwd = h

        out = lstm.encode(np.array(xs).reshape(1, 2, 1)).data
        np.testing.assert_allclose(out, [[h_fwd, h_bwd]], rtol=1e-12)

    def test_zero_weights_give_zero_state(self, rng: np.random.Generator) -> None:
        lstm = BiLSTM(in_dim=2, hidden=2, layers=1, rng=rng)
        for p in lstm.parameters():
            p.data[...] = 0.0
        # candidate tanh(0) = 0 keeps the cell empty
        out = lstm.encode(rng.normal(size=(3, 4, 2))).data
        np.testing.assert_array_equal(out, np.zeros((3, 4)))
