"""File-level pipelines behind the command-line tool.

Every artifact written here embeds a header with the tool version, the
command, the resolved configuration and SHA-256 digests of the inputs. No
timestamps or paths go into headers, so rerunning a command with the same
inputs and configuration reproduces its outputs byte for byte.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Any

from . import __version__
from ._parallel import map_ordered
from .baselines import ClodConfig, MapConfig, TileConfig, clod_score, per_image_map, tile_score
from .config import RunConfig
from .dataset import (
    Dataset,
    DatasetValidationError,
    ImageRecord,
    ValidationIssue,
    load_annotations,
    load_predictions,
    write_annotations,
    write_predictions,
)
from .evaluator import MetricsReport, evaluate
from .geometry import SimilarityParams
from .injector import inject_errors
from .objectlab import score_dataset
from .reports import write_manifest, write_report, write_scores, write_scores_csv
from .synth import attach_predictions, oracle_predictions

METHODS = ("objectlab", "map", "tile", "clod")

__all__ = [
    "METHODS",
    "make_header",
    "score_images",
    "run_score",
    "run_inject",
    "run_oracle_predict",
    "run_evaluate",
    "run_validate",
]


def _sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def make_header(command: str, config: RunConfig, inputs: dict[str, str | Path] | None = None, **extra: Any) -> dict[str, Any]:
    header: dict[str, Any] = {"tool": "labelaudit", "version": __version__, "command": command}
    if inputs:
        header["inputs"] = {name: _sha256(p) for name, p in inputs.items()}
    header.update(extra)
    header["config"] = config.to_dict()
    return header


def _map_one(image: ImageRecord, cfg: MapConfig) -> float:
    return per_image_map(image, cfg)


def _tile_one(image: ImageRecord, cfg: TileConfig, params: SimilarityParams) -> float:
    return tile_score(image, cfg, params)


def _clod_one(image: ImageRecord, cfg: ClodConfig, num_classes: int) -> float:
    return clod_score(image, cfg, num_classes)


def score_images(dataset: Dataset, method: str, config: RunConfig = RunConfig(), workers: int | None = 1) -> list[dict[str, Any]]:
    """Score records (one per image, dataset order) for any supported method."""
    if method == "objectlab":
        return [s.to_record() for s in score_dataset(dataset, config.scoring, workers)]
    if method == "map":
        values = map_ordered(_map_one, dataset.images, workers, config.map)
    elif method == "tile":
        values = map_ordered(_tile_one, dataset.images, workers, config.tile, config.scoring.similarity)
    elif method == "clod":
        values = map_ordered(_clod_one, dataset.images, workers, config.clod, dataset.num_classes)
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    return [{"image_id": im.image_id, "method": method, "score": v} for im, v in zip(dataset.images, values)]


def run_score(
    annotations: str | Path,
    predictions: str | Path,
    output: str | Path,
    method: str = "objectlab",
    config: RunConfig = RunConfig(),
    workers: int | None = 1,
    csv_path: str | Path | None = None,
) -> list[dict[str, Any]]:
    dataset = load_predictions(predictions, load_annotations(annotations, config.ingest), config.ingest)
    records = score_images(dataset, method, config, workers)
    header = make_header("score", config, {"annotations": annotations, "predictions": predictions}, method=method)
    write_scores(output, records, header)
    if csv_path is not None:
        write_scores_csv(csv_path, records)
    return records


def run_inject(
    annotations: str | Path,
    output_annotations: str | Path,
    output_manifest: str | Path,
    config: RunConfig = RunConfig(),
) -> None:
    clean = load_annotations(annotations, config.ingest)
    corrupted, manifest = inject_errors(clean, config.injection)
    header = make_header("inject", config, {"annotations": annotations}, seed=config.injection.seed)
    write_annotations(corrupted, output_annotations, info=header)
    write_manifest(output_manifest, manifest, header)


def run_oracle_predict(
    annotations: str | Path,
    output: str | Path,
    config: RunConfig = RunConfig(),
    confidence: float = 0.99,
    jitter: float = 0.0,
    spurious_rate: float = 0.0,
    seed: int = 0,
) -> None:
    """Turn an annotation file into a model-free prediction file."""
    reference = load_annotations(annotations, config.ingest)
    preds = oracle_predictions(reference, confidence, jitter, spurious_rate, seed=seed)
    header = make_header(
        "oracle-predict",
        config,
        {"annotations": annotations},
        oracle={"confidence": confidence, "jitter": jitter, "spurious_rate": spurious_rate, "seed": seed},
    )
    write_predictions(attach_predictions(reference, preds), output, info=header)


def run_evaluate(
    score_file: str | Path,
    manifest_file: str | Path,
    output: str | Path | None = None,
    column: str = "score",
    flag: str = "any",
) -> MetricsReport:
    report = evaluate(score_file, manifest_file, column, flag)
    if output is not None:
        header = {
            "tool": "labelaudit",
            "version": __version__,
            "command": "evaluate",
            "inputs": {"scores": _sha256(score_file), "manifest": _sha256(manifest_file)},
            "column": column,
            "flag": flag,
        }
        write_report(output, report.to_dict(), header)
    return report


def run_validate(
    annotations: str | Path, predictions: str | Path | None = None, config: RunConfig = RunConfig()
) -> list[ValidationIssue]:
    """Collect validation issues; errors are returned rather than raised."""
    try:
        dataset = load_annotations(annotations, config.ingest)
        if predictions is not None:
            dataset = load_predictions(predictions, dataset, config.ingest)
    except DatasetValidationError as exc:
        return exc.issues
    return list(dataset.issues)
