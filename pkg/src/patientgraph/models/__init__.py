"""LSTM-GNN: bi-directional LSTM, GNN neighbourhood encoders, static encoder and heads."""

from patientgraph.models.gnn import AttentionWeights, GATLayer, GCNLayer, MPNNLayer, SAGELayer
from patientgraph.models.lstm import BiLSTM, LSTMCell, bilstm_encode
from patientgraph.models.lstm_gnn import (
    LSTMGNN,
    ModelConfig,
    StaticEncoder,
    export_attention,
    validate_model_config,
    write_attention,
)
from patientgraph.models.module import Linear, Module
from patientgraph.models.registry import GNN_KINDS, GNNEncoder, build_gnn_encoder, resolve_gnn_kind

__all__ = [
    "GNN_KINDS",
    "LSTMGNN",
    "AttentionWeights",
    "BiLSTM",
    "GATLayer",
    "GCNLayer",
    "GNNEncoder",
    "LSTMCell",
    "Linear",
    "MPNNLayer",
    "ModelConfig",
    "Module",
    "SAGELayer",
    "StaticEncoder",
    "bilstm_encode",
    "build_gnn_encoder",
    "export_attention",
    "resolve_gnn_kind",
    "validate_model_config",
    "write_attention",
]
