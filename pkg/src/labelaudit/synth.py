"""Synthetic datasets and model-free predictors for benchmarking.

Nothing here is needed to score real data. These helpers stand in for a
trained detector so the error-detection pipeline can be exercised end to end.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .dataset import AnnotatedBox, Category, Dataset, ImageRecord, PredictedBox
from .geometry import BoundingBox, ImageDims, corner_matrix, iou_matrix

__all__ = ["make_synthetic_dataset", "oracle_predictions", "attach_predictions"]


def _separated(box: np.ndarray, placed: list[np.ndarray], dims: ImageDims, margin: float, min_dist: float) -> bool:
    if not placed:
        return True
    others = np.array(placed)
    grown = others + np.array([-margin, -margin, margin, margin])
    if iou_matrix(box[None], grown).max() > 0.0:
        return False
    d = np.linalg.norm(corner_matrix(others, dims) - corner_matrix(box[None], dims), axis=1)
    return bool(d.min() >= min_dist)


def make_synthetic_dataset(
    n_images: int = 500,
    num_classes: int = 5,
    boxes_per_image: tuple[int, int] = (1, 5),
    image_size: tuple[int, int] = (640, 480),
    side_range: tuple[float, float] = (0.08, 0.25),
    min_corner_distance: float = 0.25,
    margin: float = 8.0,
    seed: int = 0,
) -> Dataset:
    """Random clean annotations with well-separated, integer-valued boxes.

    Boxes in one image never overlap (even after growing each by ``margin``
    pixels) and their normalized corner vectors are at least
    ``min_corner_distance`` apart. ``side_range`` gives box sides as fractions
    of the image sides.
    """
    rng = np.random.default_rng(seed)
    w, h = image_size
    dims = ImageDims(w, h)
    images = []
    for image_id in range(1, n_images + 1):
        target = int(rng.integers(boxes_per_image[0], boxes_per_image[1] + 1))
        placed: list[np.ndarray] = []
        for _ in range(200 * target):
            if len(placed) == target:
                break
            bw = round(rng.uniform(*side_range) * w)
            bh = round(rng.uniform(*side_range) * h)
            x = int(rng.integers(0, w - bw + 1))
            y = int(rng.integers(0, h - bh + 1))
            box = np.array([x, y, x + bw, y + bh], dtype=float)
            if _separated(box, placed, dims, margin, min_corner_distance):
                placed.append(box)
        classes = rng.integers(0, num_classes, size=len(placed))
        anns = tuple(AnnotatedBox(BoundingBox(*map(float, b)), int(c)) for b, c in zip(placed, classes))
        images.append(ImageRecord(image_id, dims, anns, (), f"{image_id:06d}.png"))
    cats = tuple(Category(i + 1, f"class_{i}") for i in range(num_classes))
    return Dataset(tuple(images), cats)


def _jitter(box: BoundingBox, amount: float, rng: np.random.Generator, dims: ImageDims) -> BoundingBox:
    scale = np.array([box.width, box.height, box.width, box.height])
    for _ in range(100):
        c = np.array(box.as_tuple()) + rng.uniform(-amount, amount, size=4) * scale
        c = np.clip(c, 0.0, [dims.width, dims.height, dims.width, dims.height])
        if c[0] < c[2] and c[1] < c[3]:
            return BoundingBox(*map(float, c))
    return box


def _spurious_box(image: ImageRecord, rng: np.random.Generator, side_range: tuple[float, float]) -> BoundingBox | None:
    w, h = image.dims.width, image.dims.height
    ab = image.annotation_boxes
    for _ in range(200):
        bw = max(1.0, round(rng.uniform(*side_range) * w))
        bh = max(1.0, round(rng.uniform(*side_range) * h))
        x = float(rng.integers(0, int(w - bw) + 1))
        y = float(rng.integers(0, int(h - bh) + 1))
        box = BoundingBox(x, y, x + bw, y + bh)
        if len(ab) == 0 or iou_matrix([box], ab).max() == 0.0:
            return box
    return None


def oracle_predictions(
    reference: Dataset,
    confidence: float = 0.99,
    jitter: float = 0.0,
    spurious_rate: float = 0.0,
    side_range: tuple[float, float] = (0.08, 0.25),
    seed: int = 0,
) -> list[tuple[PredictedBox, ...]]:
    """One prediction per annotated box of ``reference``, in image order.

    Each prediction copies the box and class at fixed ``confidence``. With
    ``jitter > 0`` every corner coordinate moves by up to ``jitter`` times the
    box side. With ``spurious_rate > 0`` that fraction of images also gets one
    confident detection of a random class in an unannotated region, mimicking
    detector false positives.
    """
    rng = np.random.default_rng(seed)
    out = []
    for image in reference.images:
        preds = []
        for ann in image.annotations:
            box = _jitter(ann.box, jitter, rng, image.dims) if jitter > 0 else ann.box
            preds.append(PredictedBox(box, ann.class_id, confidence))
        if spurious_rate > 0 and rng.random() < spurious_rate:
            extra = _spurious_box(image, rng, side_range)
            if extra is not None:
                preds.append(PredictedBox(extra, int(rng.integers(reference.num_classes)), confidence))
        out.append(tuple(preds))
    return out


def attach_predictions(dataset: Dataset, predictions: list[tuple[PredictedBox, ...]]) -> Dataset:
    """Pair per-image prediction tuples (in image order) with ``dataset``."""
    if len(predictions) != len(dataset.images):
        raise ValueError("one prediction tuple per image is required")
    images = [replace(im, predictions=p) for im, p in zip(dataset.images, predictions)]
    return replace(dataset, images=tuple(images))
