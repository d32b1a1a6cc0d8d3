"""Comparison label-quality scores.

Three alternatives to ObjectLab, each reducing an image to one number in
[0, 1] where lower means more suspect:

* :func:`per_image_map` -- COCO-style mAP of the predictions against the
  given label of a single image,
* :func:`tile_score` -- a classification reduction over a ``J x J`` grid of
  tiles, pooled with a geometric mean,
* :func:`clod_score` -- single-linkage clustering of annotated and predicted
  boxes, with a self-confidence score per cluster, mean-pooled.

Class id ``K`` (one past the last real class) stands for background.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import ImageRecord
from .geometry import SimilarityParams, iou_matrix, similarity_matrix

__all__ = [
    "MapConfig",
    "TileConfig",
    "ClodConfig",
    "BoxCluster",
    "average_precision_101",
    "per_image_map",
    "tile_grid",
    "tile_labels",
    "tile_score",
    "clod_clusters",
    "clod_score",
]


def _default_thresholds() -> tuple[float, ...]:
    return tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


@dataclass(frozen=True)
class MapConfig:
    iou_thresholds: tuple[float, ...] = _default_thresholds()
    interpolation_points: int = 101

    def __post_init__(self) -> None:
        t = self.iou_thresholds
        if not t or any(not 0.0 < x <= 1.0 for x in t) or any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError(f"iou_thresholds must be strictly increasing values in (0, 1], got {t}")
        if self.interpolation_points < 2:
            raise ValueError("interpolation_points must be >= 2")


@dataclass(frozen=True)
class TileConfig:
    grid_size: int = 8
    overlap_threshold: float = 0.5
    background_prior_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.grid_size < 1:
            raise ValueError("grid_size must be >= 1")
        if not 0.0 < self.overlap_threshold <= 1.0:
            raise ValueError("overlap_threshold must lie in (0, 1]")
        if self.background_prior_weight < 0.0:
            raise ValueError("background_prior_weight must be non-negative")


@dataclass(frozen=True)
class ClodConfig:
    linkage_cutoff: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.linkage_cutoff <= 1.0:
            raise ValueError("linkage_cutoff must lie in (0, 1]")


# --------------------------------------------------------------------- mAP


def average_precision_101(tp: np.ndarray, num_gt: int, points: int = 101) -> float:
    """Interpolated AP from TP flags of confidence-sorted detections."""
    if num_gt == 0 or tp.size == 0:
        return 0.0
    ctp = np.cumsum(tp)
    recall = ctp / num_gt
    precision = ctp / np.arange(1, tp.size + 1)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    grid = np.linspace(0.0, 1.0, points)
    idx = np.searchsorted(recall, grid, side="left")
    sampled = np.where(idx < tp.size, envelope[np.minimum(idx, tp.size - 1)], 0.0)
    return float(sampled.mean())


def _match(ious: np.ndarray, threshold: float) -> np.ndarray:
    # ious: (detections sorted by confidence, ground truths)
    matched = np.zeros(ious.shape[1], dtype=bool)
    tp = np.zeros(ious.shape[0])
    for d in range(ious.shape[0]):
        cand = np.where(~matched & (ious[d] >= threshold), ious[d], -1.0)
        if cand.size and cand.max() >= 0.0:
            g = int(np.argmax(cand))
            matched[g] = True
            tp[d] = 1.0
    return tp


def per_image_map(image: ImageRecord, cfg: MapConfig = MapConfig()) -> float:
    """Mean AP of one image's predictions, averaged over IoU thresholds then classes.

    No boxes on either side scores 1.0; exactly one empty side scores 0.0.
    """
    n_ann, n_pred = len(image.annotations), len(image.predictions)
    if n_ann == 0 and n_pred == 0:
        return 1.0
    if n_ann == 0 or n_pred == 0:
        return 0.0
    ac, pc = image.annotation_classes, image.prediction_classes
    conf = image.prediction_confidences
    ious = iou_matrix(image.prediction_boxes, image.annotation_boxes)
    per_class = []
    for k in sorted(set(ac.tolist()) | set(pc.tolist())):
        gt = np.flatnonzero(ac == k)
        dets = np.flatnonzero(pc == k)
        dets = dets[np.argsort(-conf[dets], kind="stable")]
        sub = ious[np.ix_(dets, gt)]
        aps = [average_precision_101(_match(sub, t), gt.size, cfg.interpolation_points) for t in cfg.iou_thresholds]
        per_class.append(np.mean(aps))
    return float(np.mean(per_class))


# ------------------------------------------------------------------- tiles


def tile_grid(image: ImageRecord, grid_size: int) -> np.ndarray:
    """Row-major ``(J*J, 4)`` array of equal tiles covering the image."""
    xs = np.linspace(0.0, image.dims.width, grid_size + 1)
    ys = np.linspace(0.0, image.dims.height, grid_size + 1)
    return np.array([[xs[c], ys[r], xs[c + 1], ys[r + 1]] for r in range(grid_size) for c in range(grid_size)])


def tile_labels(image: ImageRecord, tiles: np.ndarray, overlap_threshold: float, background: int) -> np.ndarray:
    """Class of the annotation covering the largest fraction of each tile, else ``background``."""
    labels = np.full(len(tiles), background, dtype=int)
    if not image.annotations:
        return labels
    ab = image.annotation_boxes
    ix = np.clip(np.minimum(tiles[:, None, 2], ab[None, :, 2]) - np.maximum(tiles[:, None, 0], ab[None, :, 0]), 0, None)
    iy = np.clip(np.minimum(tiles[:, None, 3], ab[None, :, 3]) - np.maximum(tiles[:, None, 1], ab[None, :, 1]), 0, None)
    tile_area = (tiles[:, 2] - tiles[:, 0]) * (tiles[:, 3] - tiles[:, 1])
    frac = ix * iy / tile_area[:, None]
    best = np.argmax(frac, axis=1)
    covered = frac[np.arange(len(tiles)), best] >= overlap_threshold
    labels[covered] = image.annotation_classes[best[covered]]
    return labels


def _geometric_mean(values: np.ndarray) -> float:
    if np.any(values <= 0.0):
        return 0.0
    return float(np.exp(np.mean(np.log(values))))


def tile_score(
    image: ImageRecord,
    cfg: TileConfig = TileConfig(),
    params: SimilarityParams = SimilarityParams(),
) -> float:
    """Geometric mean over tiles of the predicted probability of each tile's label.

    A tile's class distribution is the similarity-weighted average of the
    predictions' distributions (confidence on the predicted class, the rest on
    background) plus a background pseudo-box of weight
    ``cfg.background_prior_weight``.
    """
    bg = -1  # any id outside the real classes works; only equality is used
    tiles = tile_grid(image, cfg.grid_size)
    labels = tile_labels(image, tiles, cfg.overlap_threshold, bg)
    prior = cfg.background_prior_weight
    if image.predictions:
        w = similarity_matrix(tiles, image.prediction_boxes, image.dims, params)
        pc, conf = image.prediction_classes, image.prediction_confidences
        den = w.sum(axis=1) + prior
        bg_mass = w @ (1.0 - conf) + prior
        same = pc[None, :] == labels[:, None]
        fg_mass = (w * np.where(same, conf[None, :], 0.0)).sum(axis=1)
        num = np.where(labels == bg, bg_mass, fg_mass)
        probs = np.divide(num, den, out=(labels == bg).astype(float), where=den > 0)
    else:
        probs = (labels == bg).astype(float)
    return _geometric_mean(probs)


# -------------------------------------------------------------------- CLOD


@dataclass(frozen=True)
class BoxCluster:
    annotation_indices: tuple[int, ...]
    prediction_indices: tuple[int, ...]
    label: int
    probabilities: np.ndarray

    @property
    def score(self) -> float:
        return float(self.probabilities[self.label])


def _num_classes(image: ImageRecord) -> int:
    ids = [a.class_id for a in image.annotations] + [p.class_id for p in image.predictions]
    return max(ids) + 1 if ids else 1


def _single_linkage(boxes: np.ndarray, cutoff: float) -> list[list[int]]:
    # Kruskal over 1 - IoU distances: merges in increasing distance, ties by index.
    n = len(boxes)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if n > 1:
        dist = 1.0 - iou_matrix(boxes, boxes)
        iu, ju = np.triu_indices(n, k=1)
        d = dist[iu, ju]
        for e in np.lexsort((ju, iu, d)):
            if d[e] > cutoff:
                break
            ri, rj = find(int(iu[e])), find(int(ju[e]))
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def clod_clusters(
    image: ImageRecord, cfg: ClodConfig = ClodConfig(), num_classes: int | None = None
) -> list[BoxCluster]:
    """Cluster annotated and predicted boxes by single linkage on ``1 - IoU``.

    Clusters merge while their closest members are at distance
    ``<= cfg.linkage_cutoff``. Box indices inside the union are annotations
    first, then predictions; clusters are ordered by their lowest index.
    """
    k = _num_classes(image) if num_classes is None else num_classes
    n_ann = len(image.annotations)
    boxes = np.vstack([image.annotation_boxes, image.prediction_boxes])
    ac, pc = image.annotation_classes, image.prediction_classes
    conf = image.prediction_confidences
    clusters = []
    for members in _single_linkage(boxes, cfg.linkage_cutoff):
        ann = tuple(i for i in members if i < n_ann)
        pred = tuple(i - n_ann for i in members if i >= n_ann)
        if ann:
            counts = np.bincount(ac[list(ann)], minlength=k + 1)
            label = int(np.argmax(counts))
        else:
            label = k
        probs = np.zeros(k + 1)
        if pred:
            idx = list(pred)
            weights = conf[idx]
            for j, w in zip(idx, weights):
                probs[pc[j]] += w * conf[j]
                probs[k] += w * (1.0 - conf[j])
            total = weights.sum()
            probs = probs / total if total > 0 else np.eye(k + 1)[k]
        else:
            probs[k] = 1.0
        clusters.append(BoxCluster(ann, pred, label, probs))
    return clusters


def clod_score(image: ImageRecord, cfg: ClodConfig = ClodConfig(), num_classes: int | None = None) -> float:
    """Mean over clusters of the probability assigned to each cluster's label."""
    clusters = clod_clusters(image, cfg, num_classes)
    if not clusters:
        return 1.0
    return float(np.mean([c.score for c in clusters]))
