"""
Mini-batch inductive training and evaluation.

Each epoch shuffles the training ids, samples neighbourhoods from the training
pool only, and takes one Adam step per batch on the joint loss. After every
epoch the model is scored on the validation split (pool: train + val, dropout
off, task loss without the auxiliary term). Training stops after max_epochs
or after `patience` epochs without a new best validation loss, and the best
parameters are restored.

All randomness derives from TrainConfig.seed through numpy SeedSequence, so
two runs with the same config and data produce identical epoch logs.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from patientgraph.autodiff import Tensor, backward, no_grad
from patientgraph.autodiff.tensor import FloatArray
from patientgraph.errors import ConfigError, ContractError, NumericError, UndefinedMetricError
from patientgraph.graph.knn import PatientGraph
from patientgraph.metrics.report import MetricsReport, compute_report, metric_names
from patientgraph.models.lstm_gnn import LSTMGNN, ModelConfig
from patientgraph.preprocess.pipeline import PreprocessedCohort
from patientgraph.training.losses import joint_loss, task_loss
from patientgraph.training.optim import Adam, clip_grad_norm
from patientgraph.training.sampling import (
    BoolArray,
    SamplingMonitor,
    make_batches,
    pool_mask,
    sample_neighborhood,
)
from patientgraph.validation import require_non_negative, require_positive

logger = logging.getLogger(__name__)

_EVAL_STREAM = 1  # SeedSequence key separating evaluation draws from training draws
_PRED_FLOOR = 1e-12


@dataclass(frozen=True, slots=True)
class TrainConfig:
    batch_size: int = 64
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    sample_size: int = 10
    max_epochs: int = 25
    patience: int = 4
    clip_norm: float = 5.0
    seed: int = 0


def validate_train_config(cfg: TrainConfig) -> None:
    try:
        require_non_negative(cfg.learning_rate, "learning_rate")
        require_non_negative(cfg.weight_decay, "weight_decay")
        require_positive(cfg.eps, "eps")
        require_positive(cfg.clip_norm, "clip_norm")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for name in ("beta1", "beta2"):
        beta = getattr(cfg, name)
        if not 0.0 <= beta < 1.0:
            raise ConfigError(f"train.{name} must lie in [0, 1), got {beta}")
    for name in ("batch_size", "max_epochs", "patience"):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"train.{name} must be a positive integer, got {getattr(cfg, name)}")
    if cfg.sample_size < 0:
        raise ConfigError(f"train.sample_size must be >= 0, got {cfg.sample_size}")


@dataclass(frozen=True, slots=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_metrics: dict[str, float]
    best: bool


@dataclass(frozen=True, slots=True)
class TrainResult:
    params: dict[str, FloatArray]
    epoch_log: list[EpochRecord]
    best_epoch: int
    stopped_early: bool


@dataclass(frozen=True, slots=True, eq=False)
class ModelInputs:
    series: NDArray[np.float64]
    static: NDArray[np.float64]
    labels: NDArray[np.float64]


def model_inputs(cohort: PreprocessedCohort, cfg: ModelConfig) -> ModelInputs:
    return ModelInputs(
        series=cohort.series_inputs(),
        static=cohort.static_inputs(cfg.include_diagnoses_static),
        labels=cohort.labels(cfg.task),
    )


def build_model(cohort: PreprocessedCohort, cfg: ModelConfig, seed: int = 0) -> LSTMGNN:
    """Construct a model sized for the cohort, heads started at the training base rate."""
    inputs = model_inputs(cohort, cfg)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    model = LSTMGNN(
        cfg,
        series_dim=inputs.series.shape[2],
        horizon=inputs.series.shape[1],
        static_dim=inputs.static.shape[1],
        rng=rng,
    )
    y_train = inputs.labels[cohort.indices("train")]
    if y_train.size:
        if cfg.task == "los":
            model.init_output_bias(math.log(float(np.mean(y_train))))
        else:
            rate = min(max(float(np.mean(y_train)), 1e-3), 1.0 - 1e-3)
            model.init_output_bias(math.log(rate / (1.0 - rate)))
    return model


def _needs_graph(model: LSTMGNN) -> bool:
    return model.uses_graph and not model.config.dynamic


def run_batch(
    model: LSTMGNN,
    inputs: ModelInputs,
    graph: PatientGraph | None,
    targets: NDArray[np.int64],
    pool: BoolArray,
    cfg: TrainConfig,
    rng: np.random.Generator,
    training: bool,
    monitor: SamplingMonitor | None = None,
) -> tuple[Tensor, Tensor]:
    """Forward one batch; returns (y_hat, y_hat_lstm)."""
    if _needs_graph(model):
        if graph is None:
            raise ContractError(f"a {model.config.gnn_kind} model needs a patient graph")
        batch = sample_neighborhood(
            graph, targets, cfg.sample_size, pool, rng, model.config.gnn_layers, monitor
        )
        nodes, blocks = batch.nodes, batch.blocks
    else:
        nodes, blocks = targets, ()
        if monitor is not None:
            monitor.record_sampled(targets)
    return model.forward(
        inputs.series[nodes],
        inputs.static[targets],
        blocks,
        n_targets=int(targets.shape[0]),
        training=training,
        rng=rng,
    )


def predict_nodes(
    model: LSTMGNN,
    inputs: ModelInputs,
    graph: PatientGraph | None,
    ids: NDArray[np.int64],
    pool: BoolArray,
    cfg: TrainConfig,
    seed_key: Sequence[int],
    monitor: SamplingMonitor | None = None,
) -> NDArray[np.float64]:
    """Full-model predictions for ids, in id order, dropout off."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _EVAL_STREAM, *seed_key]))
    out: list[NDArray[np.float64]] = []
    with no_grad():
        for targets in make_batches(ids, cfg.batch_size):
            y_hat, _ = run_batch(model, inputs, graph, targets, pool, cfg, rng, False, monitor)
            out.append(y_hat.numpy())
    return np.concatenate(out) if out else np.zeros(0)


def _validation_metrics(task: str, preds: FloatArray, labels: FloatArray) -> dict[str, float]:
    try:
        report = compute_report("ihm" if task == "ihm" else "los", preds, labels)
        return dict(report.metrics)
    except UndefinedMetricError as exc:
        logger.warning("validation metrics undefined: %s", exc)
        return {name: math.nan for name in metric_names("ihm" if task == "ihm" else "los")}


def _validation_loss(task: str, preds: FloatArray, labels: FloatArray) -> float:
    """Task loss only, with predictions nudged inside the loss domain."""
    if task == "ihm":
        safe = np.clip(preds, _PRED_FLOOR, 1.0 - _PRED_FLOOR)
    else:
        safe = np.maximum(preds, _PRED_FLOOR)
    with no_grad():
        return task_loss(task, Tensor(safe), labels).item()


def _param_norms(model: LSTMGNN) -> str:
    return ", ".join(
        f"{name}={float(np.linalg.norm(p.data)):.3g}" for name, p in model.named_parameters()
    )


def train(
    model: LSTMGNN,
    cohort: PreprocessedCohort,
    graph: PatientGraph | None,
    cfg: TrainConfig,
    monitor: SamplingMonitor | None = None,
) -> TrainResult:
    validate_train_config(cfg)
    mcfg = model.config
    inputs = model_inputs(cohort, mcfg)
    train_ids = cohort.indices("train")
    val_ids = cohort.indices("val")
    if train_ids.size == 0 or val_ids.size == 0:
        raise ContractError("training needs non-empty train and validation splits")
    n = cohort.n_patients
    train_pool = pool_mask(n, train_ids)
    val_pool = pool_mask(n, np.concatenate([train_ids, val_ids]))

    params = model.parameters()
    opt = Adam(
        params,
        lr=cfg.learning_rate,
        betas=(cfg.beta1, cfg.beta2),
        eps=cfg.eps,
        weight_decay=cfg.weight_decay,
    )
    best_loss = math.inf
    best_epoch = 0
    best_state = model.state_dict()
    since_best = 0
    log: list[EpochRecord] = []
    stopped_early = False

    for epoch in range(1, cfg.max_epochs + 1):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, epoch]))
        total = 0.0
        for b, targets in enumerate(make_batches(train_ids, cfg.batch_size, rng)):
            model.zero_grad()
            y_hat, y_lstm = run_batch(
                model, inputs, graph, targets, train_pool, cfg, rng, True, monitor
            )
            loss = joint_loss(y_hat, y_lstm, inputs.labels[targets], mcfg.alpha, mcfg.task)
            value = loss.item()
            if not math.isfinite(value):
                raise NumericError(
                    f"non-finite loss {value} at epoch {epoch}, batch {b}; "
                    f"parameter norms: {_param_norms(model)}"
                )
            backward(loss)
            clip_grad_norm(params, cfg.clip_norm)
            opt.step()
            total += value * targets.size
            logger.debug("epoch %d batch %d loss %.6f", epoch, b, value)
        train_loss = total / train_ids.size

        preds = predict_nodes(model, inputs, graph, val_ids, val_pool, cfg, (epoch,))
        y_val = inputs.labels[val_ids]
        val_loss = _validation_loss(mcfg.task, preds, y_val)
        val_metrics = _validation_metrics(mcfg.task, preds, y_val)

        improved = val_loss < best_loss
        if improved:
            best_loss, best_epoch, since_best = val_loss, epoch, 0
            best_state = model.state_dict()
        else:
            since_best += 1
        log.append(EpochRecord(epoch, train_loss, val_loss, val_metrics, improved))
        logger.info(
            "epoch %d: train %.5f  val %.5f%s",
            epoch,
            train_loss,
            val_loss,
            "  *" if improved else "",
        )
        if since_best >= cfg.patience:
            stopped_early = True
            logger.info("early stop after epoch %d; best epoch %d", epoch, best_epoch)
            break

    model.load_state_dict(best_state)
    return TrainResult(
        params=best_state, epoch_log=log, best_epoch=best_epoch, stopped_early=stopped_early
    )


def evaluate_inductive(
    model: LSTMGNN,
    cohort: PreprocessedCohort,
    graph: PatientGraph | None,
    test_ids: Sequence[int] | NDArray[np.int64],
    cfg: TrainConfig,
    monitor: SamplingMonitor | None = None,
) -> tuple[MetricsReport, NDArray[np.float64]]:
    """
    Score test_ids with neighbours sampled from the whole cohort.

    Returns the metrics report and the per-node predictions in test_ids order.
    """
    ids = np.asarray(test_ids, dtype=np.int64)
    if ids.size == 0:
        raise ContractError("evaluation needs at least one test node")
    inputs = model_inputs(cohort, model.config)
    pool = pool_mask(cohort.n_patients, None)
    preds = predict_nodes(model, inputs, graph, ids, pool, cfg, (0,), monitor)
    if monitor is not None:
        monitor.record_evaluated(ids)
    report = compute_report(model.config.task, preds, inputs.labels[ids])
    logger.info(
        "evaluated %d nodes: %s",
        report.n,
        ", ".join(f"{k}={v:.4f}" for k, v in report.metrics.items()),
    )
    return report, preds


def write_epoch_log(log: Sequence[EpochRecord], path: Path) -> None:
    rows = []
    for rec in log:
        row: dict[str, object] = {
            "epoch": rec.epoch,
            "train_loss": rec.train_loss,
            "val_loss": rec.val_loss,
        }
        row.update({f"val_{k}": v for k, v in rec.val_metrics.items()})
        row["best"] = int(rec.best)
        rows.append(row)
    pd.DataFrame(rows).to_csv(path, index=False)

