"""
The hybrid model: temporal encoder -> h_T, GNN over sampled neighbourhoods
of h_T -> h_N, static encoder -> h_S, and two heads:

    y_hat      = out(head([h_T || h_N || h_S]))
    y_hat_lstm = out(lstm_head(h_T))

out() is sigmoid for mortality and exp for length of stay. With gnn_kind
"none" the model reduces to the LSTM baseline on (h_T, h_S).
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray

from patientgraph.autodiff import Tensor, concat, dropout, no_grad, take_rows
from patientgraph.autodiff.ops import elu, exp, sigmoid
from patientgraph.errors import CapabilityError, ConfigError, ContractError
from patientgraph.graph.blocks import Block, full_block
from patientgraph.graph.knn import PatientGraph, dynamic_knn_from_embeddings
from patientgraph.models.gnn import AttentionWeights, GATLayer
from patientgraph.models.lstm import BiLSTM
from patientgraph.models.module import Linear, Module
from patientgraph.models.registry import GNNEncoder, build_gnn_encoder, resolve_gnn_kind
from patientgraph.validation import require_non_negative

logger = logging.getLogger(__name__)

Task = Literal["ihm", "los"]
TemporalEncoder = Literal["lstm", "flat"]


@dataclass(frozen=True, slots=True)
class ModelConfig:
    task: Task = "los"
    gnn_kind: str = "none"
    temporal_encoder: TemporalEncoder = "lstm"
    lstm_hidden: int = 32
    lstm_layers: int = 1
    gnn_hidden: int = 32
    gnn_out: int = 32
    gnn_layers: int = 1
    gat_heads: int = 4
    gat_out_heads: int = 1
    mpnn_steps: int = 2
    static_hidden: int = 16
    final_hidden: int = 0
    dropout: float = 0.0
    gnn_dropout: float = 0.0
    gat_attention_dropout: float = 0.0
    alpha: float = 1.0
    include_diagnoses_static: bool = True
    dynamic: bool = False
    dynamic_k: int = 3


def validate_model_config(cfg: ModelConfig) -> None:
    if cfg.task not in ("ihm", "los"):
        raise ConfigError(f"task must be 'ihm' or 'los', got {cfg.task!r}")
    if cfg.temporal_encoder not in ("lstm", "flat"):
        raise ConfigError(
            f"temporal_encoder must be 'lstm' or 'flat', got {cfg.temporal_encoder!r}"
        )
    kind = resolve_gnn_kind(cfg.gnn_kind).kind
    for name in (
        "lstm_hidden",
        "lstm_layers",
        "gnn_hidden",
        "gnn_out",
        "gnn_layers",
        "gat_heads",
        "gat_out_heads",
        "mpnn_steps",
        "static_hidden",
        "dynamic_k",
    ):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"model.{name} must be a positive integer, got {getattr(cfg, name)}")
    if cfg.final_hidden < 0:
        raise ConfigError(f"model.final_hidden must be >= 0, got {cfg.final_hidden}")
    for name in ("dropout", "gnn_dropout", "gat_attention_dropout"):
        rate = getattr(cfg, name)
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"model.{name} must lie in [0, 1), got {rate}")
    try:
        require_non_negative(cfg.alpha, "alpha")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.dynamic and kind == "none":
        raise ConfigError("a dynamic graph needs a gnn kind other than 'none'")


class StaticEncoder(Module):
    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.affine = self.add_module("affine", Linear(in_dim, hidden, rng))

    @property
    def out_dim(self) -> int:
        return self.affine.out_dim

    def __call__(self, x: ArrayLike | Tensor) -> Tensor:
        t = x if isinstance(x, Tensor) else Tensor(x)
        return elu(self.affine(t))


class PredictionHead(Module):
    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.hidden = self.add_module("hidden", Linear(in_dim, hidden, rng)) if hidden else None
        self.out = self.add_module("out", Linear(hidden or in_dim, 1, rng))

    def __call__(self, x: Tensor) -> Tensor:
        if self.hidden is not None:
            x = elu(self.hidden(x))
        return self.out(x)


class LSTMGNN(Module):
    def __init__(
        self,
        cfg: ModelConfig,
        series_dim: int,
        horizon: int,
        static_dim: int,
        rng: np.random.Generator,
    ) -> None:
        super().__init__()
        validate_model_config(cfg)
        self.config = cfg
        self.series_dim = series_dim
        self.horizon = horizon
        self.static_dim = static_dim
        self.temporal: BiLSTM | None = None
        if cfg.temporal_encoder == "lstm":
            self.temporal = self.add_module(
                "lstm", BiLSTM(series_dim, cfg.lstm_hidden, cfg.lstm_layers, rng, cfg.dropout)
            )
            ht_dim = self.temporal.out_dim
        else:
            ht_dim = horizon * series_dim
        self.ht_dim = ht_dim
        built = build_gnn_encoder(cfg, ht_dim, rng)
        self.gnn: GNNEncoder | None = self.add_module("gnn", built) if built is not None else None
        self.static = self.add_module("static", StaticEncoder(static_dim, cfg.static_hidden, rng))
        hn_dim = self.gnn.out_dim if self.gnn is not None else 0
        self.head = self.add_module(
            "head", PredictionHead(ht_dim + hn_dim + cfg.static_hidden, cfg.final_hidden, rng)
        )
        self.lstm_head = self.add_module("lstm_head", Linear(ht_dim, 1, rng))

    @property
    def uses_graph(self) -> bool:
        return self.gnn is not None

    def init_output_bias(self, value: float) -> None:
        """Start both heads at a constant pre-activation (e.g. log of the mean stay)."""
        self.head.out.bias.data[...] = value
        self.lstm_head.bias.data[...] = value

    def encode_temporal(
        self,
        series: ArrayLike,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        x = np.asarray(series, dtype=np.float64)
        if x.ndim != 3 or x.shape[1] == 0:
            raise ContractError(f"series input must be N x T x F with T >= 1, got {x.shape}")
        if self.temporal is not None:
            return self.temporal.encode(x, training, rng)
        return Tensor(x.reshape(x.shape[0], -1))

    def dynamic_blocks(self, h_t: Tensor) -> list[Block]:
        graph = dynamic_knn_from_embeddings(h_t.data, self.config.dynamic_k)
        return [full_block(graph)] * self.config.gnn_layers

    def predict(
        self,
        h_t: Tensor,
        h_n: Tensor | None,
        h_s: Tensor,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> tuple[Tensor, Tensor]:
        parts = [h_t] if h_n is None else [h_t, h_n]
        joint = dropout(concat([*parts, h_s], axis=1), self.config.dropout, rng, training)
        raw = self.head(joint)
        raw_lstm = self.lstm_head(h_t)
        link = sigmoid if self.config.task == "ihm" else exp
        n = h_t.shape[0]
        return link(raw).reshape(n), link(raw_lstm).reshape(n)

    def forward(
        self,
        series: ArrayLike,
        static: ArrayLike,
        blocks: Sequence[Block],
        n_targets: int,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> tuple[Tensor, Tensor]:
        """
        series covers every node of the sampled neighbourhood, targets first;
        static covers the targets only. Returns (y_hat, y_hat_lstm), one per target.
        """
        h_all = self.encode_temporal(series, training, rng)
        h_t = h_all if h_all.shape[0] == n_targets else take_rows(h_all, np.arange(n_targets))
        h_n: Tensor | None = None
        if self.gnn is not None:
            if self.config.dynamic:
                h_n = self.gnn(h_t, self.dynamic_blocks(h_t), training, rng)
            else:
                h_n = self.gnn(h_all, blocks, training, rng)
        h_s = self.static(static)
        return self.predict(h_t, h_n, h_s, training, rng)


# ---------------------------------------------------------------------------
# Attention export
# ---------------------------------------------------------------------------


def export_attention(
    model: LSTMGNN,
    series: ArrayLike,
    graph: PatientGraph,
) -> AttentionWeights:
    """
    Attention coefficients of the output GAT layer over every node's full
    out-neighbourhood plus its self-loop. Per node and head they sum to 1.
    """
    info = resolve_gnn_kind(model.config.gnn_kind)
    if not info.exports_attention or model.gnn is None:
        raise CapabilityError(f"{info.kind} models have no attention weights to export")
    block = full_block(graph)
    with no_grad():
        h = model.encode_temporal(series)
        layers = model.gnn.layers
        for layer in layers[:-1]:
            h = layer(h, block)
        last = layers[-1]
        if not isinstance(last, GATLayer):
            raise CapabilityError("the output GNN layer does not compute attention")
        _, alpha, src, dst = last.attend(h, block)
    return AttentionWeights(src=src, dst=dst, weights=alpha.numpy())


def write_attention(
    weights: AttentionWeights,
    path: Path,
    patient_ids: Sequence[str],
) -> None:
    """One row per (edge, head): dst, src, head, weight. Self-loops have dst == src."""
    e, heads = weights.weights.shape
    ids: NDArray[np.str_] = np.asarray(patient_ids)
    pd.DataFrame(
        {
            "dst": np.repeat(ids[weights.dst], heads),
            "src": np.repeat(ids[weights.src], heads),
            "head": np.tile(np.arange(heads), e),
            "weight": weights.weights.reshape(-1),
        }
    ).to_csv(path, index=False)
    logger.info("wrote %d attention coefficients to %s", e * heads, path)
