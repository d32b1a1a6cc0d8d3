"""ObjectLab label-quality scores for object-detection images.

Each image gets three subtype scores, one per error type:

* ``badloc``: annotated boxes compared with overlapping same-class predictions,
* ``swap``: annotated boxes compared with confident other-class predictions,
* ``overlook``: confident predictions with no corresponding annotation.

Per-box quality values are pooled with :func:`softmin` and the image score is
the geometric mean of the three pooled values. Lower means more suspect.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from ._parallel import map_ordered
from .dataset import Dataset, ImageRecord, min_similarity
from .geometry import SimilarityParams, iou_matrix, similarity_matrix

__all__ = [
    "Q_STAR",
    "ScoringConfig",
    "ImageScore",
    "softmin",
    "badloc_box_scores",
    "swapped_box_scores",
    "overlooked_box_scores",
    "objectlab_score",
    "score_dataset",
]

#: Largest possible per-box quality estimate.
Q_STAR = 1.0

OverlookedMode = Literal["matched-skip", "literal"]


@dataclass(frozen=True)
class ScoringConfig:
    """Knobs of the ObjectLab scorer.

    ``overlooked_mode="matched-skip"`` treats a confident prediction that
    overlaps a same-class annotation as matched (quality ``Q_STAR``).
    ``"literal"`` only ever compares predictions with *non*-overlapping
    same-class annotations, so even perfectly matched predictions fall
    through to the ``sim_star * (1 - confidence)`` branch.
    """

    similarity: SimilarityParams = SimilarityParams()
    tau_up: float = 0.95
    softmin_temperature: float = 1.0
    overlooked_mode: OverlookedMode = "matched-skip"

    def __post_init__(self) -> None:
        if not 0.0 < self.tau_up <= 1.0:
            raise ValueError(f"tau_up must lie in (0, 1], got {self.tau_up}")
        if not self.softmin_temperature > 0.0:
            raise ValueError(f"softmin_temperature must be positive, got {self.softmin_temperature}")
        if self.overlooked_mode not in ("matched-skip", "literal"):
            raise ValueError(f"unknown overlooked_mode {self.overlooked_mode!r}")


@dataclass(frozen=True)
class ImageScore:
    image_id: Any
    score: float
    badloc: float
    swap: float
    overlook: float
    per_box: dict[str, list[float]] = field(default_factory=dict, compare=False)

    def to_record(self) -> dict[str, Any]:
        return {
            "image_id": self.image_id,
            "method": "objectlab",
            "score": self.score,
            "badloc": self.badloc,
            "swap": self.swap,
            "overlook": self.overlook,
            "per_box": self.per_box,
        }


def softmin(values, temperature: float = 1.0) -> float:
    """Smooth minimum ``<q, softmax((1 - q) / T)>`` of values in [0, 1].

    Small values get exponentially more weight, so the result sits between the
    minimum and the mean; ``T -> 0`` recovers the minimum, ``T -> inf`` the mean.
    """
    q = np.asarray(values, dtype=float).ravel()
    if q.size == 0:
        raise ValueError("softmin of an empty sequence")
    if not temperature > 0.0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    z = (1.0 - q) / temperature
    w = np.exp(z - z.max())
    pooled = float(np.dot(q, w) / w.sum())
    # rounding can leave the result an ulp outside [min, max]
    return min(max(pooled, float(q.min())), float(q.max()))


def badloc_box_scores(image: ImageRecord, cfg: ScoringConfig = ScoringConfig()) -> np.ndarray:
    """Location quality of every annotated box, in annotation order."""
    n = len(image.annotations)
    out = np.full(n, Q_STAR)
    if n == 0 or not image.predictions:
        return out
    ab, pb = image.annotation_boxes, image.prediction_boxes
    ac, pc = image.annotation_classes, image.prediction_classes
    ious = iou_matrix(ab, pb)
    sims = similarity_matrix(ab, pb, image.dims, cfg.similarity)
    for i in range(n):
        candidates = (pc == ac[i]) & (ious[i] > 0.0)
        if candidates.any():
            out[i] = sims[i, candidates].max()
    return out


def swapped_box_scores(image: ImageRecord, cfg: ScoringConfig = ScoringConfig()) -> np.ndarray:
    """Class-label quality of every annotated box, in annotation order."""
    n = len(image.annotations)
    out = np.full(n, Q_STAR)
    if n == 0 or not image.predictions:
        return out
    confident = image.prediction_confidences > cfg.tau_up
    if not confident.any():
        return out
    ab, pb = image.annotation_boxes, image.prediction_boxes
    ac, pc = image.annotation_classes, image.prediction_classes
    sims = similarity_matrix(ab, pb, image.dims, cfg.similarity)
    for i in range(n):
        candidates = confident & (pc != ac[i])
        if candidates.any():
            out[i] = 1.0 - sims[i, candidates].max()
    return out


def overlooked_box_scores(
    image: ImageRecord, cfg: ScoringConfig = ScoringConfig(), sim_star: float = 0.0
) -> np.ndarray:
    """Quality of every confident prediction as evidence of a missing box.

    Returns ``[Q_STAR]`` when no prediction is confident enough, so the result
    is never empty.
    """
    conf = image.prediction_confidences
    keep = conf > cfg.tau_up
    if not keep.any():
        return np.array([Q_STAR])
    pb = image.prediction_boxes[keep]
    pc = image.prediction_classes[keep]
    pconf = conf[keep]
    ab, ac = image.annotation_boxes, image.annotation_classes
    ious = iou_matrix(pb, ab)
    sims = similarity_matrix(pb, ab, image.dims, cfg.similarity)
    out = np.empty(len(pb))
    for j in range(len(pb)):
        same = ac == pc[j]
        if cfg.overlooked_mode == "matched-skip" and (same & (ious[j] > 0.0)).any():
            out[j] = Q_STAR
            continue
        distant = same & (ious[j] == 0.0)
        if distant.any():
            out[j] = sims[j, distant].max()
        else:
            out[j] = sim_star * (1.0 - pconf[j])
    return out


def objectlab_score(image: ImageRecord, cfg: ScoringConfig = ScoringConfig(), sim_star: float = 0.0) -> ImageScore:
    """Score one image. ``sim_star`` must come from the whole dataset."""
    t = cfg.softmin_temperature
    badloc_q = badloc_box_scores(image, cfg)
    swap_q = swapped_box_scores(image, cfg)
    overlook_q = overlooked_box_scores(image, cfg, sim_star)

    badloc = softmin(badloc_q, t) if badloc_q.size else Q_STAR
    swap = softmin(swap_q, t) if swap_q.size else Q_STAR
    overlook = softmin(overlook_q, t)
    score = float(np.cbrt(badloc * swap * overlook))
    return ImageScore(
        image_id=image.image_id,
        score=score,
        badloc=badloc,
        swap=swap,
        overlook=overlook,
        per_box={
            "badloc": badloc_q.tolist(),
            "swap": swap_q.tolist(),
            "overlook": overlook_q.tolist(),
        },
    )


def _score_one(image: ImageRecord, cfg: ScoringConfig, sim_star: float) -> ImageScore:
    return objectlab_score(image, cfg, sim_star)


def score_dataset(dataset: Dataset, cfg: ScoringConfig = ScoringConfig(), workers: int = 1) -> list[ImageScore]:
    """Score every image of ``dataset``, in dataset (image id) order.

    The dataset-wide minimum similarity is computed first; images are then
    scored independently, optionally across ``workers`` processes.
    """
    sim_star = min_similarity(dataset, cfg.similarity)
    return map_ordered(_score_one, dataset.images, workers, cfg, sim_star)
