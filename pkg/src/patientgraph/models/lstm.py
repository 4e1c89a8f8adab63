"""
Bi-directional stacked LSTM over the hourly series.

Standard cell, gates ordered (input, forget, candidate, output):
    z = x W + h U + b
    c' = sigmoid(z_f) * c + sigmoid(z_i) * tanh(z_g)
    h' = sigmoid(z_o) * tanh(c')

h_T concatenates the forward state after the last hour with the backward
state after the first hour (the end of the reversed pass).
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from patientgraph.autodiff import Tensor, columns, concat, dropout, matmul
from patientgraph.autodiff.ops import sigmoid, tanh
from patientgraph.errors import ContractError
from patientgraph.models.module import Module


class LSTMCell(Module):
    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.hidden = hidden
        self.w = self.add_parameter("w", (in_dim, 4 * hidden), rng, in_dim)
        self.u = self.add_parameter("u", (hidden, 4 * hidden), rng, hidden)
        self.b = self.add_parameter("b", (4 * hidden,), rng, hidden)

    def step(self, x: Tensor, h: Tensor, c: Tensor) -> tuple[Tensor, Tensor]:
        z = matmul(x, self.w) + matmul(h, self.u) + self.b
        n = self.hidden
        i = sigmoid(columns(z, 0, n))
        f = sigmoid(columns(z, n, 2 * n))
        g = tanh(columns(z, 2 * n, 3 * n))
        o = sigmoid(columns(z, 3 * n, 4 * n))
        c_next = f * c + i * g
        return o * tanh(c_next), c_next


class BiLSTM(Module):
    def __init__(
        self,
        in_dim: int,
        hidden: int,
        layers: int,
        rng: np.random.Generator,
        dropout_rate: float = 0.0,
    ) -> None:
        super().__init__()
        self.hidden = hidden
        self.dropout_rate = dropout_rate
        self.forward_cells: list[LSTMCell] = []
        self.backward_cells: list[LSTMCell] = []
        for layer in range(layers):
            width = in_dim if layer == 0 else 2 * hidden
            self.forward_cells.append(self.add_module(f"fwd{layer}", LSTMCell(width, hidden, rng)))
            self.backward_cells.append(self.add_module(f"bwd{layer}", LSTMCell(width, hidden, rng)))

    @property
    def out_dim(self) -> int:
        return 2 * self.hidden

    def _run(self, cell: LSTMCell, steps: list[Tensor], reverse: bool) -> list[Tensor]:
        n = steps[0].shape[0]
        h = Tensor(np.zeros((n, self.hidden)))
        c = Tensor(np.zeros((n, self.hidden)))
        out: list[Tensor | None] = [None] * len(steps)
        order = range(len(steps) - 1, -1, -1) if reverse else range(len(steps))
        for t in order:
            h, c = cell.step(steps[t], h, c)
            out[t] = h
        return [s for s in out if s is not None]

    def encode(
        self,
        x: ArrayLike | Tensor,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        """x is N x T x F; returns h_T, N x 2*hidden."""
        data = x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)
        if data.ndim != 3 or data.shape[1] == 0:
            raise ContractError(f"series input must be N x T x F with T >= 1, got {data.shape}")
        steps = [Tensor(data[:, t, :]) for t in range(data.shape[1])]
        fwd: list[Tensor] = []
        bwd: list[Tensor] = []
        for layer, (f_cell, b_cell) in enumerate(
            zip(self.forward_cells, self.backward_cells, strict=True)
        ):
            if layer > 0:
                steps = [
                    dropout(concat([a, b], axis=1), self.dropout_rate, rng, training)
                    for a, b in zip(fwd, bwd, strict=True)
                ]
            fwd = self._run(f_cell, steps, reverse=False)
            bwd = self._run(b_cell, steps, reverse=True)
        return concat([fwd[-1], bwd[0]], axis=1)


def bilstm_encode(
    encoder: BiLSTM,
    x: ArrayLike,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    return encoder.encode(x, training, rng)
