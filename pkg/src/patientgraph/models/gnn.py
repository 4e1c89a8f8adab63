"""
Neighbourhood encoders. Each layer maps source-node features of a Block to
its destination nodes:

    gcn   ELU(mean over {self} U neighbours of (h W) + b)
    sage  ELU([h_self W_self || mean_j h_j W_neigh] + b), width 2 * out
    gat   multi-head attention over {self} U neighbours; heads concatenated
          in hidden layers, averaged in the output layer; then ELU
    mpnn  projection, then `steps` rounds of summed messages
          MLP([h_j || score_ij]) and a gated update of the destination
          states, then an ELU output layer

A destination with no sampled neighbours depends on its own features only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from patientgraph.autodiff import (
    Tensor,
    add_bias,
    columns,
    concat,
    dropout,
    matmul,
    segment_aggregate,
    segment_softmax,
    take_rows,
)
from patientgraph.autodiff.ops import elementwise, elu, sigmoid, tanh
from patientgraph.autodiff.tensor import FloatArray
from patientgraph.errors import ConfigError
from patientgraph.graph.blocks import Block
from patientgraph.models.module import Linear, Module


def _dst_rows(h: Tensor, block: Block) -> Tensor:
    return take_rows(h, np.arange(block.n_dst))


class GNNLayer(Module):
    out_dim: int

    def __call__(
        self,
        h: Tensor,
        block: Block,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        raise NotImplementedError


class GCNLayer(GNNLayer):
    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        rng: np.random.Generator,
        dropout_rate: float = 0.0,
    ) -> None:
        super().__init__()
        self.out_dim = out_dim
        self.dropout_rate = dropout_rate
        self.weight = self.add_parameter("weight", (in_dim, out_dim), rng, in_dim)
        self.bias = self.add_parameter("bias", (out_dim,), rng, in_dim)

    def __call__(
        self,
        h: Tensor,
        block: Block,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        z = matmul(dropout(h, self.dropout_rate, rng, training), self.weight)
        summed = _dst_rows(z, block) + segment_aggregate(
            take_rows(z, block.src), block.dst, block.n_dst, "sum"
        )
        norm = Tensor((1.0 / (block.in_degree() + 1.0))[:, None])
        return elu(add_bias(summed * norm, self.bias))


class SAGELayer(GNNLayer):
    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        rng: np.random.Generator,
        dropout_rate: float = 0.0,
    ) -> None:
        super().__init__()
        self.out_dim = 2 * out_dim
        self.dropout_rate = dropout_rate
        self.w_self = self.add_parameter("w_self", (in_dim, out_dim), rng, in_dim)
        self.w_neigh = self.add_parameter("w_neigh", (in_dim, out_dim), rng, in_dim)
        self.bias = self.add_parameter("bias", (2 * out_dim,), rng, in_dim)

    def __call__(
        self,
        h: Tensor,
        block: Block,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        x = dropout(h, self.dropout_rate, rng, training)
        own = matmul(_dst_rows(x, block), self.w_self)
        neigh = segment_aggregate(
            matmul(take_rows(x, block.src), self.w_neigh), block.dst, block.n_dst, "mean"
        )
        return elu(add_bias(concat([own, neigh], axis=1), self.bias))


@dataclass(frozen=True, slots=True, eq=False)
class AttentionWeights:
    """Softmax coefficients per edge (self-loops last) and head, E x heads."""

    src: NDArray[np.int64]
    dst: NDArray[np.int64]
    weights: FloatArray


class GATLayer(GNNLayer):
    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        heads: int,
        concat_heads: bool,
        rng: np.random.Generator,
        dropout_rate: float = 0.0,
        attention_dropout: float = 0.0,
    ) -> None:
        super().__init__()
        self.heads = heads
        self.head_dim = out_dim
        self.concat_heads = concat_heads
        self.out_dim = heads * out_dim if concat_heads else out_dim
        self.dropout_rate = dropout_rate
        self.attention_dropout = attention_dropout
        width = heads * out_dim
        self.weight = self.add_parameter("weight", (in_dim, width), rng, in_dim)
        self.att_src = self.add_parameter("att_src", (width,), rng, out_dim)
        self.att_dst = self.add_parameter("att_dst", (width,), rng, out_dim)
        self.bias = self.add_parameter("bias", (self.out_dim,), rng, in_dim)

    def _per_head(self, z: Tensor, a: Tensor) -> Tensor:
        n = z.shape[0]
        return (z * a).reshape(n, self.heads, self.head_dim).sum(axis=2)

    def attend(
        self,
        h: Tensor,
        block: Block,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> tuple[Tensor, Tensor, NDArray[np.int64], NDArray[np.int64]]:
        """Layer output plus the attention coefficients and their (src, dst) edges."""
        self_loops = np.arange(block.n_dst, dtype=np.int64)
        src = np.concatenate([block.src, self_loops])
        dst = np.concatenate([block.dst, self_loops])
        z = matmul(dropout(h, self.dropout_rate, rng, training), self.weight)
        logits = take_rows(self._per_head(z, self.att_src), src) + take_rows(
            self._per_head(_dst_rows(z, block), self.att_dst), dst
        )
        alpha = segment_softmax(elementwise("leaky_relu", logits), dst, block.n_dst)
        dropped = dropout(alpha, self.attention_dropout, rng, training)
        e = src.shape[0]
        messages = take_rows(z, src).reshape(e, self.heads, self.head_dim) * dropped.reshape(
            e, self.heads, 1
        )
        agg = segment_aggregate(
            messages.reshape(e, self.heads * self.head_dim), dst, block.n_dst, "sum"
        )
        if not self.concat_heads:
            agg = agg.reshape(block.n_dst, self.heads, self.head_dim).sum(axis=1) / float(
                self.heads
            )
        return elu(add_bias(agg, self.bias)), alpha, src, dst

    def __call__(
        self,
        h: Tensor,
        block: Block,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        return self.attend(h, block, training, rng)[0]


class MPNNLayer(GNNLayer):
    def __init__(
        self,
        in_dim: int,
        hidden: int,
        out_dim: int,
        steps: int,
        rng: np.random.Generator,
        dropout_rate: float = 0.0,
    ) -> None:
        super().__init__()
        self.hidden = hidden
        self.steps = steps
        self.out_dim = out_dim
        self.dropout_rate = dropout_rate
        self.project = self.add_module("project", Linear(in_dim, hidden, rng))
        self.message_hidden = self.add_module("message_hidden", Linear(hidden + 1, hidden, rng))
        self.message_out = self.add_module("message_out", Linear(hidden, hidden, rng))
        self.gate = self.add_module("gate", Linear(2 * hidden, 2 * hidden, rng))
        self.readout = self.add_module("readout", Linear(hidden, out_dim, rng))

    def __call__(
        self,
        h: Tensor,
        block: Block,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        if block.scores is None:
            raise ConfigError("mpnn layers need edge scores on every block")
        state = elu(self.project(dropout(h, self.dropout_rate, rng, training)))
        score_col = Tensor(block.scores.reshape(-1, 1))
        rest = np.arange(block.n_dst, block.n_src)
        n = self.hidden
        for _ in range(self.steps):
            edge_in = concat([take_rows(state, block.src), score_col], axis=1)
            messages = self.message_out(elu(self.message_hidden(edge_in)))
            agg = segment_aggregate(messages, block.dst, block.n_dst, "sum")
            prev = _dst_rows(state, block)
            gates = self.gate(concat([agg, prev], axis=1))
            update = sigmoid(columns(gates, 0, n))
            candidate = tanh(columns(gates, n, 2 * n))
            new_dst = prev + update * (candidate - prev)
            state = concat([new_dst, take_rows(state, rest)], axis=0) if rest.size else new_dst
        return elu(self.readout(_dst_rows(state, block)))
