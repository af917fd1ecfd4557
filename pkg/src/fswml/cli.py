"""Command line: ingest, audit, train, evaluate, sweep, importance, recommend, render.

Exit status 0 on success, 1 on data/runtime errors, 2 on usage errors.
Human-readable tables go to stdout; `--out` (or `--json`) emits JSON.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .cart import RegressionTree, render_tree_text
from .dataset import (
    DatasetError,
    EMBEDDED_CSV,
    check_missing,
    dataset_fingerprint,
    dumps_csv,
    embedded_fsw_dataset,
    encode,
    load_csv,
    read_raw_table,
    train_test_split,
)
from .evaluation import evaluate, importance_over_seeds, rank_features, summarize, sweep
from .models import MODEL_KINDS, ModelConfig, fit_model, importances, model_kind
from .optimizer import BaseMetal, ParameterGrid, recommend
from .report import (
    importance_svg,
    importance_text,
    metrics_text,
    recommendation_text,
    summary_text,
    sweep_text,
)
from .serialize import dumps_model, load_model

COMMANDS = ("ingest", "audit", "train", "evaluate", "sweep", "importance", "recommend", "render")
REPORT_VERSION = 1
U64_MAX = (1 << 64) - 1


@dataclass
class RunConfig:
    command: str
    dataset: str = "embedded"
    model_kind: str = "tree"
    include_tool: bool = False
    test_ratio: float = 0.2
    seed: int = 0
    n_seeds: int = 1
    model: ModelConfig = field(default_factory=ModelConfig)
    out: Optional[str] = None
    json_stdout: bool = False
    load: Optional[str] = None
    svg: Optional[str] = None
    dense: Optional[int] = None
    top_k: int = 5
    base_uts: float = 310.0
    tree_index: int = 0

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "model_kind": self.model_kind,
            "include_tool": self.include_tool,
            "test_ratio": self.test_ratio,
            "seed": self.seed,
            "n_seeds": self.n_seeds,
            "hyperparameters": vars(self.model).copy(),
        }


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _ratio(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"test ratio must lie strictly between 0 and 1, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _depth(text: str):
    # "none" (unlimited) must stay distinguishable from "flag not given" (None)
    if text.lower() == "none":
        return "none"
    return _non_negative_int(text)


def _learning_rate(text: str) -> float:
    value = float(text)
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"learning rate must lie in (0, 1], got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--dataset", default="embedded", help="CSV path or 'embedded' (default)")
    shared.add_argument("--model", dest="model_kind", choices=MODEL_KINDS, default=None,
                        help="model kind (default: tree; forest for importance/recommend)")
    shared.add_argument("--include-tool", action="store_true", help="one-hot encode tool material")
    shared.add_argument("--test-ratio", type=_ratio, default=0.2)
    shared.add_argument("--seed", type=_seed, default=0, help="split/forest seed (first seed for sweeps)")
    shared.add_argument("--seeds", dest="n_seeds", type=_positive_int, default=None,
                        help="number of seeds for sweep (default 200) and importance (default 1)")
    shared.add_argument("--trees", type=_positive_int, default=100)
    shared.add_argument("--max-features", type=_positive_int, default=None)
    shared.add_argument("--stages", type=_non_negative_int, default=100)
    shared.add_argument("--learning-rate", type=_learning_rate, default=0.1)
    shared.add_argument("--max-depth", type=_depth, default=None,
                        help="integer or 'none' (default: none for tree/forest, 3 for gbm stages)")
    shared.add_argument("--out", default=None, help="write the JSON document here")
    shared.add_argument("--json", dest="json_stdout", action="store_true",
                        help="print the JSON document instead of the text table")

    parser = argparse.ArgumentParser(
        prog="fswml", description="Tree-ensemble UTS regression for friction stir welding runs.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    helps = {
        "ingest": "load and validate a dataset; --out writes the normalized CSV",
        "audit": "missing-value check and summary statistics",
        "train": "fit a model on the training split; --out writes the model file",
        "evaluate": "train and report MSE/MAE/R2 on the test split",
        "sweep": "evaluate over many split seeds and report percentiles",
        "importance": "impurity-decrease importances from models fit on every row",
        "recommend": "grid-search the setting with the highest predicted UTS",
        "render": "print a fitted tree as indented text",
    }
    subs = {name: sub.add_parser(name, parents=[shared], help=helps[name]) for name in COMMANDS}
    subs["importance"].add_argument("--svg", default=None, help="write a bar chart here")
    subs["recommend"].add_argument("--dense", type=_positive_int, default=None,
                                   help="levels per numeric range instead of the experimental ones")
    subs["recommend"].add_argument("--top", dest="top_k", type=_non_negative_int, default=5)
    subs["recommend"].add_argument("--base-uts", type=float, default=310.0)
    for name in ("recommend", "render"):
        subs[name].add_argument("--load", default=None, help="use a saved model file")
    subs["render"].add_argument("--tree-index", type=_non_negative_int, default=0,
                                help="which forest tree / boosting stage to print")
    return parser


def parse_args(argv: Sequence[str]) -> RunConfig:
    """Validated RunConfig; raises SystemExit(2) on usage errors."""
    parser = build_parser()
    if not argv:
        parser.print_help(sys.stderr)
        raise SystemExit(2)
    ns = parser.parse_args(argv)
    if ns.command is None:
        parser.print_help(sys.stderr)
        raise SystemExit(2)
    kind = ns.model_kind or ("forest" if ns.command in ("importance", "recommend") else "tree")
    depth = None if ns.max_depth == "none" else ns.max_depth
    if ns.max_depth is None:
        model = ModelConfig(n_trees=ns.trees, max_features=ns.max_features, n_stages=ns.stages,
                            learning_rate=ns.learning_rate)
    elif kind == "gbm":
        model = ModelConfig(n_trees=ns.trees, max_features=ns.max_features, n_stages=ns.stages,
                            learning_rate=ns.learning_rate, stage_max_depth=depth)
    else:
        model = ModelConfig(max_depth=depth, n_trees=ns.trees, max_features=ns.max_features,
                            n_stages=ns.stages, learning_rate=ns.learning_rate)
    n_seeds = ns.n_seeds or (200 if ns.command == "sweep" else 1)
    if ns.command == "recommend" and ns.base_uts <= 0:
        parser.error(f"--base-uts must be positive, got {ns.base_uts}")
    return RunConfig(
        command=ns.command, dataset=ns.dataset, model_kind=kind, include_tool=ns.include_tool,
        test_ratio=ns.test_ratio, seed=ns.seed, n_seeds=n_seeds, model=model, out=ns.out,
        json_stdout=ns.json_stdout, load=getattr(ns, "load", None), svg=getattr(ns, "svg", None),
        dense=getattr(ns, "dense", None), top_k=getattr(ns, "top_k", 5),
        base_uts=getattr(ns, "base_uts", 310.0), tree_index=getattr(ns, "tree_index", 0),
    )


def _read_source(path: str) -> bytes:
    if path == "embedded":
        return EMBEDDED_CSV.encode("utf-8")
    with open(path, "rb") as fh:
        return fh.read()


def _load_dataset(cfg: RunConfig):
    if cfg.dataset == "embedded":
        return embedded_fsw_dataset()
    return load_csv(_read_source(cfg.dataset), name=cfg.dataset)


def _document(cfg: RunConfig, result: dict) -> str:
    doc = {"format_version": REPORT_VERSION, "command": cfg.command, "config": cfg.to_dict(),
           "result": result}
    return json.dumps(doc, indent=1) + "\n"


def _emit(cfg: RunConfig, text: str, result: dict, out) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_document(cfg, result))
    out.write(_document(cfg, result) if cfg.json_stdout else text + "\n")


def _fingerprint(dataset, split) -> dict:
    return {"dataset_sha256": dataset_fingerprint(dataset), "seed": split.seed,
            "test_ratio": split.test_ratio, "train_indices": list(split.train_indices)}


def run_pipeline(cfg: RunConfig, out=None) -> int:
    """Load, audit, encode, split, train, evaluate and report per `cfg.command`."""
    out = out or sys.stdout
    cmd = cfg.command

    if cmd == "audit":
        # the raw-table pass reports gaps that load_csv would reject outright
        missing = check_missing(read_raw_table(_read_source(cfg.dataset)))
        lines = [f"{missing.missing_cells} missing of {missing.total_cells} cells"]
        lines += [f"  row {r + 1}, column {c}" for r, c in missing.locations]
        result = {"missing": {"total_cells": missing.total_cells,
                              "missing_cells": missing.missing_cells,
                              "locations": [{"row": r, "column": c} for r, c in missing.locations]}}
        if missing.missing_cells == 0:
            stats = summarize(_load_dataset(cfg))
            lines.append(summary_text(stats))
            result["summary"] = stats.to_dict()
        _emit(cfg, "\n".join(lines), result, out)
        return 0 if missing.missing_cells == 0 else 1

    dataset = _load_dataset(cfg)

    if cmd == "ingest":
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(dumps_csv(dataset))
        info = {"source": dataset.source, "n_records": len(dataset),
                "sha256": dataset_fingerprint(dataset)}
        text = f"{len(dataset)} records from {dataset.source} (sha256 {info['sha256'][:12]})"
        out.write(json.dumps(info, indent=1) + "\n" if cfg.json_stdout else text + "\n")
        return 0

    matrix = encode(dataset, cfg.include_tool)

    if cmd == "sweep":
        report = sweep(cfg.model_kind, matrix, cfg.n_seeds, cfg.test_ratio, cfg.model, cfg.seed)
        result = {"model_kind": report.model_kind, "seeds": list(report.seeds),
                  "summary": report.summary(), "runs": [r.to_dict() for r in report.reports]}
        _emit(cfg, sweep_text(report), result, out)
        return 0

    if cmd == "importance":
        seeds = range(cfg.seed, cfg.seed + cfg.n_seeds)
        report = importance_over_seeds(cfg.model_kind, matrix, seeds, cfg.model)
        if cfg.svg:
            with open(cfg.svg, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(importance_svg(report))
        _emit(cfg, importance_text(report), report.to_dict(), out)
        return 0

    if cmd == "recommend":
        if cfg.load:
            model = load_model(cfg.load)
        else:
            model = fit_model(cfg.model_kind, matrix, range(matrix.n), cfg.model, seed=cfg.seed)
        grid = ParameterGrid.dense(cfg.dense) if cfg.dense else ParameterGrid()
        rec = recommend(model, grid, BaseMetal(tensile_strength=cfg.base_uts), cfg.top_k)
        _emit(cfg, recommendation_text(rec), rec.to_dict(), out)
        return 0

    split = train_test_split(matrix, cfg.test_ratio, cfg.seed)

    if cmd == "evaluate":
        report = evaluate(cfg.model_kind, matrix, split, cfg.model)
        _emit(cfg, metrics_text(report), report.to_dict(), out)
        return 0

    if cmd == "train":
        model = fit_model(cfg.model_kind, matrix, split.train_indices, cfg.model, seed=cfg.seed)
        text = dumps_model(model, _fingerprint(dataset, split))
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            ranked = rank_features(importances(model), matrix.feature_names, cfg.model_kind)
            out.write(f"trained {cfg.model_kind} on {len(split.train_indices)} rows -> {cfg.out}\n")
            out.write(importance_text(ranked) + "\n")
        else:
            out.write(text)
        return 0

    if cmd == "render":
        model = load_model(cfg.load) if cfg.load else \
            fit_model(cfg.model_kind, matrix, split.train_indices, cfg.model, seed=cfg.seed)
        kind = model_kind(model)
        if kind == "tree":
            tree = model
        else:
            members = model.trees if kind == "forest" else model.stages
            if cfg.tree_index >= len(members):
                raise ValueError(f"--tree-index {cfg.tree_index} out of range (model has {len(members)})")
            tree = members[cfg.tree_index]
        assert isinstance(tree, RegressionTree)
        buf = io.StringIO()
        render_tree_text(tree, buf)
        out.write(buf.getvalue())
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(buf.getvalue())
        return 0

    raise ValueError(f"unknown command {cmd!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run_pipeline(cfg)
    except (DatasetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
