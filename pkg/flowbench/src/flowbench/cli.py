"""Command line front end.

    flowbench evaluate --csv flows.csv --task binary --model RF --out-dir out/
    flowbench compare  --csv te=a.csv --csv nte=b.csv --out-dir out/

``evaluate`` writes metrics.json plus confusion / feature-importance images;
``compare`` runs the RF/DT/NB grid with Extra-Trees top-k selection.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import DatasetError
from .evaluate import (
    DEFAULT_SEED,
    DEFAULT_TEST_FRACTION,
    SELECTION_EXTRA_TREES,
    SELECTION_NONE,
    SplitError,
    TaskSpec,
    evaluate_csv,
    multi_model_compare,
)
from .report import save_confusion_png, save_importance_png, write_json


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowbench", description="Classification benchmark over flow CSVs"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="train and score one model on one CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--task", choices=["binary", "multiclass"], default="binary")
    p.add_argument("--model", choices=["RF", "DT", "NB"], default="RF")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--test-fraction", type=float, default=DEFAULT_TEST_FRACTION)
    p.add_argument(
        "--feature-selection",
        choices=[SELECTION_NONE, SELECTION_EXTRA_TREES],
        default=SELECTION_NONE,
    )
    p.add_argument("--top-k", type=int, default=15)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("compare", help="RF/DT/NB grid over named datasets")
    p.add_argument(
        "--csv",
        action="append",
        required=True,
        metavar="NAME=PATH",
        help="repeatable; dataset name and CSV path",
    )
    p.add_argument("--tasks", default="binary,multiclass")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--top-k", type=int, default=15)
    p.add_argument("--out-dir", required=True)
    return parser


def _cmd_evaluate(args) -> int:
    spec = TaskSpec(
        task=args.task,
        model=args.model,
        seed=args.seed,
        test_fraction=args.test_fraction,
        feature_selection=args.feature_selection,
        top_k=args.top_k,
    )
    report = evaluate_csv(args.csv, spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{Path(args.csv).stem}.{args.task}.{args.model}"
    write_json(report, out_dir / f"{stem}.metrics.json")
    save_confusion_png(report, out_dir / f"{stem}.confusion.png")
    save_importance_png(report, out_dir / f"{stem}.importance.png")
    m = report.metrics
    print(
        f"{report.source} {args.task}/{args.model}: "
        f"precision={m.precision:.4f} recall={m.recall:.4f} "
        f"accuracy={m.accuracy:.4f} f1={m.f1:.4f} auc={m.roc_auc:.4f} "
        f"(n_test={report.n_test}, dropped_nan_rows={report.dropped_nan_rows})"
    )
    return 0


def _cmd_compare(args) -> int:
    datasets = {}
    for item in args.csv:
        if "=" not in item:
            print(f"compare: expected NAME=PATH, got {item!r}", file=sys.stderr)
            return 1
        name, path = item.split("=", 1)
        datasets[name] = path
    tasks = tuple(t.strip() for t in args.tasks.split(",") if t.strip())
    rows, table = multi_model_compare(
        datasets, tasks=tasks, seed=args.seed, top_k=args.top_k
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "comparison.json").write_text(
        json.dumps(rows, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out_dir / "comparison.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        return _cmd_compare(args)
    except (DatasetError, SplitError, ValueError, OSError) as exc:
        print(f"flowbench {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
