"""Data model and COCO-format ingestion.

Annotations are read from COCO annotation JSON and predictions from COCO
detection-results JSON. Category ids are remapped to dense ``0..K-1`` in order
of increasing original id; the mapping is kept on the :class:`Dataset` so any
output can be written with the original ids.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Hashable, Iterable, Sequence

import numpy as np

from .geometry import BoundingBox, ImageDims, SimilarityParams, as_array, similarity_matrix

logger = logging.getLogger(__name__)

__all__ = [
    "AnnotatedBox",
    "PredictedBox",
    "ImageRecord",
    "Category",
    "Dataset",
    "IngestConfig",
    "ValidationIssue",
    "IngestError",
    "DatasetValidationError",
    "image_sort_key",
    "load_annotations",
    "load_predictions",
    "parse_annotations",
    "parse_predictions",
    "annotations_to_coco",
    "predictions_to_coco",
    "write_annotations",
    "write_predictions",
    "min_similarity",
]


@dataclass(frozen=True)
class AnnotatedBox:
    box: BoundingBox
    class_id: int


@dataclass(frozen=True)
class PredictedBox:
    box: BoundingBox
    class_id: int
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence}")


@dataclass(frozen=True)
class ImageRecord:
    image_id: Hashable
    dims: ImageDims
    annotations: tuple[AnnotatedBox, ...] = ()
    predictions: tuple[PredictedBox, ...] = ()
    file_name: str | None = None

    @property
    def annotation_boxes(self) -> np.ndarray:
        return as_array([a.box for a in self.annotations])

    @property
    def annotation_classes(self) -> np.ndarray:
        return np.array([a.class_id for a in self.annotations], dtype=int)

    @property
    def prediction_boxes(self) -> np.ndarray:
        return as_array([p.box for p in self.predictions])

    @property
    def prediction_classes(self) -> np.ndarray:
        return np.array([p.class_id for p in self.predictions], dtype=int)

    @property
    def prediction_confidences(self) -> np.ndarray:
        return np.array([p.confidence for p in self.predictions], dtype=float)


@dataclass(frozen=True)
class Category:
    original_id: int
    name: str = ""


@dataclass(frozen=True)
class IngestConfig:
    tau_down: float = 0.5
    clip_boxes: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau_down < 1.0:
            raise ValueError(f"tau_down must lie in [0, 1), got {self.tau_down}")


@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "error" or "warning"
    image_id: Any
    message: str

    def to_dict(self) -> dict[str, Any]:
        return {"severity": self.severity, "image_id": self.image_id, "message": self.message}


class IngestError(Exception):
    """Input file could not be parsed at all."""


class DatasetValidationError(Exception):
    """Input parsed but violates the data contract."""

    def __init__(self, issues: Sequence[ValidationIssue]):
        self.issues = list(issues)
        errors = [i for i in self.issues if i.severity == "error"]
        head = "; ".join(f"[{i.image_id}] {i.message}" for i in errors[:5])
        more = f" (+{len(errors) - 5} more)" if len(errors) > 5 else ""
        super().__init__(f"{len(errors)} validation error(s): {head}{more}")

    def report(self) -> list[dict[str, Any]]:
        return [i.to_dict() for i in self.issues]


def image_sort_key(image_id: Any) -> tuple[int, Any]:
    """Total order on image ids: integers numerically, then strings."""
    if isinstance(image_id, (int, np.integer)) and not isinstance(image_id, bool):
        return (0, int(image_id))
    return (1, str(image_id))


@dataclass(frozen=True)
class Dataset:
    images: tuple[ImageRecord, ...]
    categories: tuple[Category, ...]
    issues: tuple[ValidationIssue, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        ids = [im.image_id for im in self.images]
        if len(set(ids)) != len(ids):
            raise ValueError("image ids must be unique")

    @property
    def num_classes(self) -> int:
        return len(self.categories)

    @property
    def image_ids(self) -> list[Any]:
        return [im.image_id for im in self.images]

    def __len__(self) -> int:
        return len(self.images)

    def __getitem__(self, image_id: Any) -> ImageRecord:
        for im in self.images:
            if im.image_id == image_id:
                return im
        raise KeyError(image_id)

    def original_category_id(self, class_id: int) -> int:
        return self.categories[class_id].original_id

    def dense_class_id(self, original_id: int) -> int:
        return self._dense_map()[original_id]

    def _dense_map(self) -> dict[int, int]:
        return {c.original_id: i for i, c in enumerate(self.categories)}

    def with_images(self, images: Iterable[ImageRecord]) -> "Dataset":
        images = sorted(images, key=lambda im: image_sort_key(im.image_id))
        return replace(self, images=tuple(images), issues=())

    def without_predictions(self) -> "Dataset":
        return self.with_images(replace(im, predictions=()) for im in self.images)


def _read_json(path: str | Path) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _convert_box(
    bbox: Any, dims: ImageDims, image_id: Any, clip: bool, issues: list[ValidationIssue], what: str
) -> BoundingBox | None:
    try:
        x, y, w, h = (float(v) for v in bbox)
    except (TypeError, ValueError):
        issues.append(ValidationIssue("error", image_id, f"{what}: bbox must be [x, y, w, h], got {bbox!r}"))
        return None
    if not all(np.isfinite([x, y, w, h])):
        issues.append(ValidationIssue("error", image_id, f"{what}: non-finite bbox {bbox!r}"))
        return None
    if w <= 0 or h <= 0:
        issues.append(ValidationIssue("error", image_id, f"{what}: zero or negative width/height in bbox {bbox!r}"))
        return None
    x1, y1, x2, y2 = x, y, x + w, y + h
    if x1 < 0 or y1 < 0 or x2 > dims.width or y2 > dims.height:
        if not clip:
            issues.append(ValidationIssue("error", image_id, f"{what}: bbox {bbox!r} exceeds image bounds"))
            return None
        x1, y1 = max(x1, 0.0), max(y1, 0.0)
        x2, y2 = min(x2, float(dims.width)), min(y2, float(dims.height))
        if not (x1 < x2 and y1 < y2):
            issues.append(ValidationIssue("error", image_id, f"{what}: bbox {bbox!r} lies outside the image"))
            return None
        issues.append(ValidationIssue("warning", image_id, f"{what}: bbox {bbox!r} clipped to image bounds"))
    return BoundingBox(x1, y1, x2, y2)


def parse_annotations(doc: Any, cfg: IngestConfig = IngestConfig()) -> Dataset:
    """Build a :class:`Dataset` from a decoded COCO annotation document."""
    if not isinstance(doc, dict) or "images" not in doc:
        raise IngestError("annotation document must be an object with an 'images' array")
    issues: list[ValidationIssue] = []

    raw_cats = doc.get("categories") or []
    cats = sorted(
        {int(c["id"]): Category(int(c["id"]), str(c.get("name", ""))) for c in raw_cats}.values(),
        key=lambda c: c.original_id,
    )
    dense = {c.original_id: i for i, c in enumerate(cats)}

    dims_by_id: dict[Any, ImageDims] = {}
    names: dict[Any, str | None] = {}
    for im in doc["images"]:
        image_id = im.get("id")
        if image_id in dims_by_id:
            issues.append(ValidationIssue("error", image_id, "duplicate image id"))
            continue
        try:
            dims_by_id[image_id] = ImageDims(int(im["width"]), int(im["height"]))
        except (KeyError, TypeError, ValueError) as exc:
            issues.append(ValidationIssue("error", image_id, f"invalid image dimensions: {exc}"))
            continue
        names[image_id] = im.get("file_name")

    boxes: dict[Any, list[AnnotatedBox]] = {i: [] for i in dims_by_id}
    for n, ann in enumerate(doc.get("annotations") or []):
        image_id = ann.get("image_id")
        what = f"annotation #{n}"
        if image_id not in dims_by_id:
            issues.append(ValidationIssue("error", image_id, f"{what} references unknown image id"))
            continue
        cat = ann.get("category_id")
        if cat not in dense:
            issues.append(ValidationIssue("error", image_id, f"{what} has unknown category id {cat!r}"))
            continue
        box = _convert_box(ann.get("bbox"), dims_by_id[image_id], image_id, cfg.clip_boxes, issues, what)
        if box is not None:
            boxes[image_id].append(AnnotatedBox(box, dense[cat]))

    if any(i.severity == "error" for i in issues):
        raise DatasetValidationError(issues)
    for issue in issues:
        logger.warning("image %s: %s", issue.image_id, issue.message)

    images = [
        ImageRecord(i, dims_by_id[i], tuple(boxes[i]), (), names[i])
        for i in sorted(dims_by_id, key=image_sort_key)
    ]
    return Dataset(tuple(images), tuple(cats), tuple(issues))


def load_annotations(path: str | Path, cfg: IngestConfig = IngestConfig()) -> Dataset:
    """Read a COCO annotation file. The returned images have no predictions."""
    return parse_annotations(_read_json(path), cfg)


def parse_predictions(doc: Any, dataset: Dataset, cfg: IngestConfig = IngestConfig()) -> Dataset:
    """Attach decoded COCO detection results to ``dataset``.

    Accepts the plain results list or an object whose ``"annotations"`` key
    holds that list. Predictions with score ``<= cfg.tau_down`` are dropped.
    """
    if isinstance(doc, dict):
        doc = doc.get("annotations")
    if not isinstance(doc, list):
        raise IngestError("detection results must be a list of {image_id, category_id, bbox, score}")
    issues: list[ValidationIssue] = list(dataset.issues)
    dense = dataset._dense_map()
    by_id = {im.image_id: im for im in dataset.images}
    preds: dict[Any, list[PredictedBox]] = {i: [] for i in by_id}

    for n, det in enumerate(doc):
        image_id = det.get("image_id")
        what = f"prediction #{n}"
        if image_id not in by_id:
            issues.append(ValidationIssue("error", image_id, f"{what} references unknown image id"))
            continue
        cat = det.get("category_id")
        if cat not in dense:
            issues.append(ValidationIssue("error", image_id, f"{what} has unknown category id {cat!r}"))
            continue
        try:
            score = float(det["score"])
        except (KeyError, TypeError, ValueError):
            issues.append(ValidationIssue("error", image_id, f"{what} has no numeric score"))
            continue
        if not 0.0 <= score <= 1.0:
            issues.append(ValidationIssue("error", image_id, f"{what} score {score} outside [0, 1]"))
            continue
        box = _convert_box(det.get("bbox"), by_id[image_id].dims, image_id, cfg.clip_boxes, issues, what)
        if box is None or score <= cfg.tau_down:
            continue
        preds[image_id].append(PredictedBox(box, dense[cat], score))

    if any(i.severity == "error" for i in issues):
        raise DatasetValidationError(issues)
    images = [replace(im, predictions=tuple(preds[im.image_id])) for im in dataset.images]
    return replace(dataset, images=tuple(images), issues=tuple(issues))


def load_predictions(path: str | Path, dataset: Dataset, cfg: IngestConfig = IngestConfig()) -> Dataset:
    return parse_predictions(_read_json(path), dataset, cfg)


def annotations_to_coco(dataset: Dataset, info: dict[str, Any] | None = None) -> dict[str, Any]:
    """Serialize the given labels of ``dataset`` as a COCO annotation document."""
    images, anns = [], []
    for im in dataset.images:
        entry: dict[str, Any] = {"id": im.image_id, "width": im.dims.width, "height": im.dims.height}
        if im.file_name is not None:
            entry["file_name"] = im.file_name
        images.append(entry)
        for a in im.annotations:
            anns.append(
                {
                    "id": len(anns) + 1,
                    "image_id": im.image_id,
                    "category_id": dataset.original_category_id(a.class_id),
                    "bbox": a.box.to_xywh(),
                    "area": a.box.area,
                    "iscrowd": 0,
                }
            )
    doc: dict[str, Any] = {}
    if info is not None:
        doc["info"] = info
    doc["images"] = images
    doc["annotations"] = anns
    doc["categories"] = [{"id": c.original_id, "name": c.name} for c in dataset.categories]
    return doc


def predictions_to_coco(dataset: Dataset) -> list[dict[str, Any]]:
    out = []
    for im in dataset.images:
        for p in im.predictions:
            out.append(
                {
                    "image_id": im.image_id,
                    "category_id": dataset.original_category_id(p.class_id),
                    "bbox": p.box.to_xywh(),
                    "score": p.confidence,
                }
            )
    return out


def write_annotations(dataset: Dataset, path: str | Path, info: dict[str, Any] | None = None) -> None:
    Path(path).write_text(json.dumps(annotations_to_coco(dataset, info), indent=1) + "\n", encoding="utf-8")


def write_predictions(dataset: Dataset, path: str | Path, info: dict[str, Any] | None = None) -> None:
    """Write predictions as COCO results; with ``info`` the list is wrapped in an object."""
    results: Any = predictions_to_coco(dataset)
    if info is not None:
        results = {"info": info, "annotations": results}
    Path(path).write_text(json.dumps(results, indent=1) + "\n", encoding="utf-8")


def min_similarity(dataset: Dataset | Iterable[ImageRecord], params: SimilarityParams = SimilarityParams()) -> float:
    """Smallest within-image annotated/predicted box similarity over the dataset.

    Pairs are never formed across images. Returns 0.0 when no image has both
    an annotation and a prediction.
    """
    images = dataset.images if isinstance(dataset, Dataset) else dataset
    best = np.inf
    for im in images:
        if im.annotations and im.predictions:
            sim = similarity_matrix(im.annotation_boxes, im.prediction_boxes, im.dims, params)
            best = min(best, float(sim.min()))
    return 0.0 if best == np.inf else best
