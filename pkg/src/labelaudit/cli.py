"""Command-line entry point: ``labelaudit {score,inject,evaluate,oracle-predict,validate}``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

from . import __version__
from .config import ConfigError, RunConfig
from .dataset import DatasetValidationError, IngestError
from .evaluator import EvaluationError
from .injector import InjectionError
from .pipeline import METHODS, run_evaluate, run_inject, run_oracle_predict, run_score, run_validate

# flag dest -> (config section, key)
_OVERRIDES = {
    "tau_down": ("ingest", "tau_down"),
    "no_clip": ("ingest", "clip_boxes"),
    "alpha": ("scoring", "alpha"),
    "sigma": ("scoring", "sigma"),
    "tau_up": ("scoring", "tau_up"),
    "softmin_temperature": ("scoring", "softmin_temperature"),
    "overlooked_mode": ("scoring", "overlooked_mode"),
    "grid_size": ("tile", "grid_size"),
    "linkage_cutoff": ("clod", "linkage_cutoff"),
    "image_fraction": ("injection", "image_fraction"),
    "drop_prob": ("injection", "drop_prob"),
    "swap_prob": ("injection", "swap_prob"),
    "shift_prob": ("injection", "shift_prob"),
    "seed": ("injection", "seed"),
}


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file (overridden by flags)")
    p.add_argument("--tau-down", type=float, help="confidence floor applied to predictions at load time")
    p.add_argument("--no-clip", action="store_true", default=None,
                   help="reject boxes outside the image instead of clipping them")


def _add_scoring_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--tau-up", type=float, help="confidence threshold for confident predictions")
    p.add_argument("--softmin-temperature", type=float)
    p.add_argument("--overlooked-mode", choices=["matched-skip", "literal"])
    p.add_argument("--grid-size", type=int, help="tile grid size for --method tile")
    p.add_argument("--linkage-cutoff", type=float, help="1 - IoU cutoff for --method clod")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labelaudit", description="Label-quality auditing for object detection data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score every image of a dataset")
    p.add_argument("annotations", help="COCO annotation JSON")
    p.add_argument("predictions", help="COCO detection-results JSON")
    p.add_argument("-o", "--output", required=True, help="output JSONL score file")
    p.add_argument("--method", choices=METHODS, default="objectlab")
    p.add_argument("--csv", help="also write a CSV projection of the score columns")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: all CPUs)")
    _add_config_args(p)
    _add_scoring_args(p)

    p = sub.add_parser("inject", help="inject synthetic label errors")
    p.add_argument("annotations", help="clean COCO annotation JSON")
    p.add_argument("--out-annotations", required=True)
    p.add_argument("--out-manifest", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--image-fraction", type=float)
    p.add_argument("--drop-prob", type=float)
    p.add_argument("--swap-prob", type=float)
    p.add_argument("--shift-prob", type=float)
    _add_config_args(p)

    p = sub.add_parser("evaluate", help="evaluate a score file against an error manifest")
    p.add_argument("scores", help="JSONL score file")
    p.add_argument("manifest", help="JSONL error manifest")
    p.add_argument("-o", "--output", help="write the JSON report here")
    p.add_argument("--column", default="score", help="score column to rank by (e.g. badloc, swap, overlook)")
    p.add_argument("--flag", default="any", choices=["any", "overlooked", "swapped", "badloc"])
    p.add_argument("--json", action="store_true", help="print the JSON report instead of the table")

    p = sub.add_parser("oracle-predict", help="make a prediction file from annotations (no model)")
    p.add_argument("annotations")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--jitter", type=float, default=0.0, help="max corner displacement as a fraction of box side")
    p.add_argument("--spurious-rate", type=float, default=0.0, help="fraction of images given one false detection")
    p.add_argument("--seed", type=int, default=0)
    _add_config_args(p)

    p = sub.add_parser("validate", help="check annotation (and prediction) files")
    p.add_argument("annotations")
    p.add_argument("--predictions")
    _add_config_args(p)
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    overrides: dict[str, dict[str, Any]] = {}
    for dest, (section, key) in _OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        if dest == "no_clip":
            value = not value
        overrides.setdefault(section, {})[key] = value
    return RunConfig.from_sources(getattr(args, "config", None), overrides)


def _fail(payload: dict[str, Any], code: int = 1) -> int:
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "score":
            run_score(args.annotations, args.predictions, args.output, args.method, _resolve_config(args),
                      args.workers, args.csv)
        elif args.command == "inject":
            run_inject(args.annotations, args.out_annotations, args.out_manifest, _resolve_config(args))
        elif args.command == "oracle-predict":
            run_oracle_predict(args.annotations, args.output, _resolve_config(args), args.confidence,
                               args.jitter, args.spurious_rate, args.seed)
        elif args.command == "evaluate":
            report = run_evaluate(args.scores, args.manifest, args.output, args.column, args.flag)
            if args.json:
                print(json.dumps(report.to_dict(), indent=1))
            else:
                print(report.table())
        elif args.command == "validate":
            issues = run_validate(args.annotations, args.predictions, _resolve_config(args))
            print(json.dumps([i.to_dict() for i in issues], indent=1))
            return 1 if any(i.severity == "error" for i in issues) else 0
    except DatasetValidationError as exc:
        return _fail({"error": "validation", "issues": exc.report()})
    except (IngestError, ConfigError, EvaluationError, InjectionError, KeyError, ValueError) as exc:
        return _fail({"error": type(exc).__name__, "message": str(exc)})
    return 0


if __name__ == "__main__":
    sys.exit(main())
