"""
patientgraph command line.

Stages talk to each other only through files:

    generate          synthetic cohort  -> ingestion CSVs + truth
    preprocess        ingestion CSVs    -> preprocessed directory
    build-graph       preprocessed      -> k-NN edge list
    train             preprocessed (+ graph) -> run directory
    evaluate          run directory     -> evaluation.json
    compare           run directories   -> mean ± CI table with t-test markers
    export-attention  GAT run directory -> attention.csv

Every subcommand writes manifest.json next to its outputs.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from patientgraph.autodiff.checkpoint import load_checkpoint, save_checkpoint
from patientgraph.cli.compare import compare_run_sets, load_run_set
from patientgraph.cli.manifest import RunManifest
from patientgraph.config.run_config import (
    SNAPSHOT_FILE,
    RunConfig,
    format_config,
    load_run_config,
    load_synth_config,
    resolve_path,
    write_run_config,
)
from patientgraph.errors import EXIT_OK, ConfigError, exit_code_for
from patientgraph.graph import build_knn_graph, graph_stats, read_edge_list, write_edge_list
from patientgraph.graph.knn import PatientGraph
from patientgraph.metrics import write_report_rows
from patientgraph.metrics.report import MetricsReport, write_report
from patientgraph.models import GNN_KINDS, export_attention, write_attention
from patientgraph.models.lstm_gnn import LSTMGNN, Task
from patientgraph.preprocess import (
    PreprocessedCohort,
    load_preprocessed,
    preprocess_cohort,
    read_cohort,
    save_preprocessed,
)
from patientgraph.synth import generate, summarize, write_cohort
from patientgraph.training import (
    SamplingMonitor,
    build_model,
    evaluate_inductive,
    train,
    write_epoch_log,
)

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "model.pgck"
METRICS_FILE = "metrics.json"
EVALUATION_FILE = "evaluation.json"
PREDICTIONS_FILE = "predictions.csv"
EPOCH_LOG_FILE = "epoch_log.csv"
SAMPLING_FILE = "sampling.csv"
ATTENTION_FILE = "attention.csv"
DEFAULT_GRAPH_FILE = "graph.edges"


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _path(value: str) -> Path:
    return resolve_path(value)


def _run_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_run_config(getattr(args, "config", None))
    model = cfg.model
    if getattr(args, "gnn", None) is not None:
        model = replace(model, gnn_kind=args.gnn)
    if getattr(args, "task", None) is not None:
        model = replace(model, task=args.task)
    if getattr(args, "no_diag_static", False):
        model = replace(model, include_diagnoses_static=False)
    if getattr(args, "dynamic", False):
        model = replace(model, dynamic=True)
    if getattr(args, "no_lstm", False):
        model = replace(model, temporal_encoder="flat")
    trn = cfg.train
    if getattr(args, "seed", None) is not None:
        trn = replace(trn, seed=args.seed)
    similarity = cfg.similarity
    for name in ("a", "c", "k"):
        if getattr(args, name, None) is not None:
            similarity = replace(similarity, **{name: getattr(args, name)})
    cfg = RunConfig(model=model, train=trn, similarity=similarity, preprocess=cfg.preprocess)
    # re-run validation on the overridden combination
    return load_run_config(None, cfg)


def _load_graph(
    path: Path | None, model_needs: bool, cohort: PreprocessedCohort
) -> PatientGraph | None:
    if not model_needs:
        return None
    if path is None:
        raise ConfigError("this model needs a patient graph; pass --graph")
    graph, _ = read_edge_list(path)
    if graph.n_nodes != cohort.n_patients:
        raise ConfigError(
            f"graph has {graph.n_nodes} nodes but the cohort has {cohort.n_patients} patients"
        )
    return graph


def _needs_static_graph(cfg: RunConfig) -> bool:
    return cfg.model.gnn_kind != "none" and not cfg.model.dynamic


def _restore_model(run_dir: Path, cohort: PreprocessedCohort) -> tuple[LSTMGNN, RunConfig]:
    cfg = load_run_config(run_dir / SNAPSHOT_FILE)
    model = build_model(cohort, cfg.model, seed=cfg.train.seed)
    model.load_state_dict(load_checkpoint(run_dir / CHECKPOINT_FILE))
    return model, cfg


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = load_synth_config(args.config, n_patients=args.n_patients, seed=args.seed)
    manifest = RunManifest("generate", config=format_config(cfg), seeds={"synth": cfg.seed})
    with manifest.timed("generate"):
        cohort = generate(cfg)
        written = write_cohort(cohort, args.out)
    for line in summarize(cohort).lines():
        logger.info("%s", line)
    manifest.add_outputs(written)
    manifest.write(args.out)
    return EXIT_OK


def cmd_preprocess(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    manifest = RunManifest(
        "preprocess",
        config=format_config(cfg.preprocess),
        seeds={"split": cfg.preprocess.split_seed},
    )
    manifest.add_inputs(
        [args.input / name for name in ("patients.csv", "diagnoses.csv", "timeseries.csv")]
    )
    with manifest.timed("preprocess"):
        cohort = preprocess_cohort(read_cohort(args.input), cfg.preprocess)
        written = save_preprocessed(cohort, args.out)
    manifest.add_outputs(written)
    manifest.write(args.out)
    return EXIT_OK


def cmd_build_graph(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    out = args.out or args.data / DEFAULT_GRAPH_FILE
    manifest = RunManifest("build-graph", config=format_config(cfg.similarity))
    manifest.add_inputs([args.data / "diagnoses.coo", args.data / "vocabulary.csv"])
    cohort = load_preprocessed(args.data)
    with manifest.timed("build-graph"):
        graph = build_knn_graph(cohort.diagnoses, cohort.vocabulary.occurrence, cfg.similarity)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_edge_list(graph, out, cfg.similarity)
    for line in graph_stats(graph).lines():
        logger.info("%s", line)
    manifest.add_outputs([out])
    manifest.write(out.parent)
    return EXIT_OK


def _write_sampling(
    path: Path, cohort: PreprocessedCohort, train_mon: SamplingMonitor, eval_mon: SamplingMonitor
) -> None:
    evaluated = set(eval_mon.evaluated_ids)
    pd.DataFrame(
        {
            "patient_id": cohort.patient_ids,
            "split": cohort.split,
            "train_sampled": [train_mon.sampled[i] for i in range(cohort.n_patients)],
            "eval_sampled": [eval_mon.sampled[i] for i in range(cohort.n_patients)],
            "evaluated": [int(i in evaluated) for i in range(cohort.n_patients)],
        }
    ).to_csv(path, index=False)


def _write_predictions(
    path: Path,
    cohort: PreprocessedCohort,
    ids: NDArray[np.int64],
    preds: NDArray[np.float64],
    task: Task,
) -> None:
    pd.DataFrame(
        {
            "patient_id": [cohort.patient_ids[i] for i in ids],
            "y_true": cohort.labels(task)[ids],
            "y_pred": preds,
        }
    ).to_csv(path, index=False)


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    out: Path = args.out
    cohort = load_preprocessed(args.data)
    graph = _load_graph(args.graph, _needs_static_graph(cfg), cohort)
    manifest = RunManifest(
        "train",
        config=format_config(*cfg.sections()),
        seeds={"train": cfg.train.seed, "split": cfg.preprocess.split_seed},
    )
    manifest.add_inputs([args.data] + ([args.graph] if graph is not None else []))
    out.mkdir(parents=True, exist_ok=True)
    snapshot = write_run_config(cfg, out)

    train_mon, eval_mon = SamplingMonitor(), SamplingMonitor()
    model = build_model(cohort, cfg.model, seed=cfg.train.seed)
    with manifest.timed("train"):
        result = train(model, cohort, graph, cfg.train, train_mon)
    test_ids = cohort.indices("test")
    with manifest.timed("evaluate"):
        report, preds = evaluate_inductive(model, cohort, graph, test_ids, cfg.train, eval_mon)

    save_checkpoint(out / CHECKPOINT_FILE, result.params)
    write_epoch_log(result.epoch_log, out / EPOCH_LOG_FILE)
    write_report(report, out / METRICS_FILE)
    _write_predictions(out / PREDICTIONS_FILE, cohort, test_ids, preds, cfg.model.task)
    _write_sampling(out / SAMPLING_FILE, cohort, train_mon, eval_mon)
    manifest.add_outputs(
        [
            snapshot,
            out / CHECKPOINT_FILE,
            out / EPOCH_LOG_FILE,
            out / METRICS_FILE,
            out / PREDICTIONS_FILE,
            out / SAMPLING_FILE,
        ]
    )
    manifest.write(out)
    logger.info("run written to %s (best epoch %d)", out, result.best_epoch)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    cohort = load_preprocessed(args.data)
    model, cfg = _restore_model(args.run, cohort)
    graph = _load_graph(args.graph, _needs_static_graph(cfg), cohort)
    out = args.out or args.run / EVALUATION_FILE
    manifest = RunManifest(
        "evaluate", config=format_config(*cfg.sections()), seeds={"train": cfg.train.seed}
    )
    manifest.add_inputs(
        [args.data, args.run / CHECKPOINT_FILE] + ([args.graph] if graph is not None else [])
    )
    with manifest.timed("evaluate"):
        report, _ = evaluate_inductive(model, cohort, graph, cohort.indices("test"), cfg.train)
    write_report(report, out)
    _log_report(report)
    manifest.add_outputs([out])
    manifest.write(out.parent)
    return EXIT_OK


def _log_report(report: MetricsReport) -> None:
    for name, value in report.metrics.items():
        logger.info("%-6s %.6f", name, value)


def cmd_compare(args: argparse.Namespace) -> int:
    groups: list[list[Path]] = args.runs
    labels: list[str] = args.labels or []
    if labels and len(labels) != len(groups):
        raise ConfigError(f"{len(labels)} labels given for {len(groups)} run sets")
    run_sets = [
        load_run_set(labels[i] if labels else _default_label(group, i), group)
        for i, group in enumerate(groups)
    ]
    table, rows = compare_run_sets(run_sets)
    print(table)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "table.txt").write_text(table + "\n", encoding="utf-8")
        written = [args.out / "table.txt"]
        for label, agg in rows:
            path = args.out / f"{label}.csv"
            write_report_rows(agg, path)
            written.append(path)
        manifest = RunManifest("compare")
        manifest.add_inputs([p for group in groups for p in group])
        manifest.add_outputs(written)
        manifest.write(args.out)
    return EXIT_OK


def _default_label(group: Sequence[Path], index: int) -> str:
    return group[0].name if len(group) == 1 else f"set{index}"


def cmd_export_attention(args: argparse.Namespace) -> int:
    cohort = load_preprocessed(args.data)
    model, cfg = _restore_model(args.run, cohort)
    if args.graph is None:
        raise ConfigError("export-attention needs --graph")
    graph, _ = read_edge_list(args.graph)
    out = args.out or args.run / ATTENTION_FILE
    weights = export_attention(model, cohort.series_inputs(), graph)
    write_attention(weights, out, cohort.patient_ids)
    manifest = RunManifest("export-attention", config=format_config(*cfg.sections()))
    manifest.add_inputs([args.run / CHECKPOINT_FILE, args.graph])
    manifest.add_outputs([out])
    manifest.write(out.parent)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patientgraph", description="LSTM-GNN patient outcome prediction"
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic cohort")
    p.add_argument("--out", type=_path, required=True)
    p.add_argument("--config", type=_path)
    p.add_argument("--n-patients", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("preprocess", help="ingestion CSVs to model-ready arrays")
    p.add_argument("--input", type=_path, required=True)
    p.add_argument("--out", type=_path, required=True)
    p.add_argument("--config", type=_path)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("build-graph", help="diagnosis-similarity k-NN graph")
    p.add_argument("--input", "--data", dest="data", type=_path, required=True)
    p.add_argument("--out", type=_path)
    p.add_argument("--config", type=_path)
    p.add_argument("--a", type=float, help="weight of shared diagnoses")
    p.add_argument("--c", type=float, help="constant added to 1/d per shared diagnosis")
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("train", help="train one model and evaluate it on the test split")
    p.add_argument("--data", type=_path, required=True)
    p.add_argument("--graph", type=_path)
    p.add_argument("--out", type=_path, required=True)
    p.add_argument("--config", type=_path)
    p.add_argument("--gnn", choices=sorted(GNN_KINDS))
    p.add_argument("--task", choices=["ihm", "los"])
    p.add_argument("--no-diag-static", action="store_true")
    p.add_argument("--dynamic", action="store_true")
    p.add_argument("--no-lstm", action="store_true")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="re-score a trained run on the test split")
    p.add_argument("--run", type=_path, required=True)
    p.add_argument("--data", type=_path, required=True)
    p.add_argument("--graph", type=_path)
    p.add_argument("--out", type=_path)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="mean ± CI table over run sets")
    p.add_argument(
        "--runs",
        type=_path,
        nargs="+",
        action="append",
        required=True,
        help="one run set; repeat for more (the first is the baseline)",
    )
    p.add_argument("--labels", nargs="+")
    p.add_argument("--out", type=_path)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("export-attention", help="GAT attention weights over the full graph")
    p.add_argument("--run", type=_path, required=True)
    p.add_argument("--data", type=_path, required=True)
    p.add_argument("--graph", type=_path)
    p.add_argument("--out", type=_path)
    p.set_defaults(func=cmd_export_attention)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return int(args.func(args))
    except Exception as exc:
        code = exit_code_for(exc)
        logger.error("%s failed: %s", args.command, exc)
        return code


if __name__ == "__main__":
    sys.exit(main())
