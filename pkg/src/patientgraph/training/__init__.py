"""Inductive neighbourhood-sampled training, joint loss, Adam and evaluation."""

from patientgraph.graph.blocks import Block
from patientgraph.training.losses import joint_loss, loss_ihm, loss_los, task_loss
from patientgraph.training.optim import Adam, clip_grad_norm
from patientgraph.training.sampling import (
    Batch,
    SamplingMonitor,
    make_batches,
    pool_mask,
    sample_neighborhood,
)
from patientgraph.training.trainer import (
    EpochRecord,
    TrainConfig,
    TrainResult,
    build_model,
    evaluate_inductive,
    model_inputs,
    train,
    validate_train_config,
    write_epoch_log,
)

__all__ = [
    "Adam",
    "Batch",
    "Block",
    "EpochRecord",
    "SamplingMonitor",
    "TrainConfig",
    "TrainResult",
    "build_model",
    "clip_grad_norm",
    "evaluate_inductive",
    "joint_loss",
    "loss_ihm",
    "loss_los",
    "make_batches",
    "model_inputs",
    "pool_mask",
    "sample_neighborhood",
    "task_loss",
    "train",
    "validate_train_config",
    "write_epoch_log",
]
