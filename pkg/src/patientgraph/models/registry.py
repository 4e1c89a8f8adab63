from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from patientgraph.autodiff import Tensor
from patientgraph.errors import ConfigError, ContractError
from patientgraph.graph.blocks import Block
from patientgraph.models.gnn import GATLayer, GCNLayer, GNNLayer, MPNNLayer, SAGELayer
from patientgraph.models.module import Module

if TYPE_CHECKING:
    from patientgraph.models.lstm_gnn import ModelConfig


@dataclass(frozen=True, slots=True)
class GNNKindInfo:
    kind: str
    needs_edge_scores: bool
    exports_attention: bool


GNN_KINDS: dict[str, GNNKindInfo] = {
    "gcn": GNNKindInfo(kind="gcn", needs_edge_scores=False, exports_attention=False),
    "gat": GNNKindInfo(kind="gat", needs_edge_scores=False, exports_attention=True),
    "sage": GNNKindInfo(kind="sage", needs_edge_scores=False, exports_attention=False),
    "mpnn": GNNKindInfo(kind="mpnn", needs_edge_scores=True, exports_attention=False),
    "none": GNNKindInfo(kind="none", needs_edge_scores=False, exports_attention=False),
}


def resolve_gnn_kind(name: str) -> GNNKindInfo:
    info = GNN_KINDS.get(name.strip().lower())
    if info is None:
        raise ConfigError(f"unknown gnn kind: {name} (expected one of {sorted(GNN_KINDS)})")
    return info


class GNNEncoder(Module):
    """Stack of GNN layers; layer l consumes hop L - l of the sampled blocks."""

    def __init__(self, layers: Sequence[GNNLayer]) -> None:
        super().__init__()
        self.layers = [self.add_module(f"layer{i}", layer) for i, layer in enumerate(layers)]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def __call__(
        self,
        h: Tensor,
        blocks: Sequence[Block],
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        """blocks[0] ends at the targets; blocks[-1] starts from the outermost hop."""
        if len(blocks) != len(self.layers):
            raise ContractError(
                f"{len(self.layers)} GNN layers need as many blocks, got {len(blocks)}"
            )
        for layer, block in zip(self.layers, reversed(blocks), strict=True):
            h = layer(h, block, training, rng)
        return h


def build_gnn_encoder(cfg: ModelConfig, in_dim: int, rng: np.random.Generator) -> GNNEncoder | None:
    kind = resolve_gnn_kind(cfg.gnn_kind).kind
    if kind == "none":
        return None
    layers: list[GNNLayer] = []
    width = in_dim
    for i in range(cfg.gnn_layers):
        last = i == cfg.gnn_layers - 1
        out = cfg.gnn_out if last else cfg.gnn_hidden
        layer: GNNLayer
        if kind == "gcn":
            layer = GCNLayer(width, out, rng, cfg.gnn_dropout)
        elif kind == "sage":
            layer = SAGELayer(width, out, rng, cfg.gnn_dropout)
        elif kind == "gat":
            layer = GATLayer(
                width,
                out,
                heads=cfg.gat_out_heads if last else cfg.gat_heads,
                concat_heads=not last,
                rng=rng,
                dropout_rate=cfg.gnn_dropout,
                attention_dropout=cfg.gat_attention_dropout,
            )
        else:
            layer = MPNNLayer(width, cfg.gnn_hidden, out, cfg.mpnn_steps, rng, cfg.gnn_dropout)
        layers.append(layer)
        width = layer.out_dim
    return GNNEncoder(layers)
