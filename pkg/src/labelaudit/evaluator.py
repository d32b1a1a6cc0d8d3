"""Retrieval metrics for label-error detection.

Images are ranked ascending by score (most suspect first); ties are broken
by image id so every metric is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .dataset import image_sort_key
from .reports import read_manifest, read_scores

__all__ = [
    "EvaluationError",
    "RankedResult",
    "MetricsReport",
    "rank",
    "average_precision",
    "precision_at_k",
    "evaluate_scores",
    "evaluate",
]


class EvaluationError(Exception):
    pass


@dataclass(frozen=True)
class RankedResult:
    image_ids: tuple[Any, ...]
    truth: np.ndarray  # bool, aligned with image_ids


@dataclass
class MetricsReport:
    average_precision: float
    precision_at_100: float
    precision_at_100_k: int
    precision_at_T: float
    T: int
    num_images: int
    precision_curve: list[float] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "average_precision": self.average_precision,
            "precision_at_100": self.precision_at_100,
            "precision_at_100_k": self.precision_at_100_k,
            "precision_at_T": self.precision_at_T,
            "T": self.T,
            "num_images": self.num_images,
            "precision_curve": self.precision_curve,
        }

    def table(self) -> str:
        rows = [
            ("Average Precision", f"{self.average_precision:.4f}"),
            (f"Precision@100 (k={self.precision_at_100_k})", f"{self.precision_at_100:.4f}"),
            (f"Precision@T (T={self.T})", f"{self.precision_at_T:.4f}"),
            ("images", str(self.num_images)),
        ]
        width = max(len(r[0]) for r in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def rank(scores: Mapping[Any, float], truth: Mapping[Any, bool]) -> RankedResult:
    """Order images by ascending score, breaking ties by image id."""
    if set(scores) != set(truth):
        diff = sorted(set(scores) ^ set(truth), key=image_sort_key)
        raise EvaluationError(f"score and truth image ids differ: {diff[:20]}")
    order = sorted(scores, key=lambda i: (float(scores[i]), image_sort_key(i)))
    return RankedResult(tuple(order), np.array([bool(truth[i]) for i in order], dtype=bool))


def average_precision(scores: Mapping[Any, float], truth: Mapping[Any, bool]) -> float:
    """Mean of the precision at the rank of each truly mislabeled image."""
    ranked = rank(scores, truth)
    hits = ranked.truth
    if not hits.any():
        raise EvaluationError("average precision is undefined without positive images")
    positions = np.flatnonzero(hits) + 1
    return float(np.mean(np.arange(1, len(positions) + 1) / positions))


def precision_at_k(scores: Mapping[Any, float], truth: Mapping[Any, bool], k: int) -> float:
    ranked = rank(scores, truth)
    if not 1 <= k <= len(ranked.image_ids):
        raise EvaluationError(f"k={k} outside [1, {len(ranked.image_ids)}]")
    return float(ranked.truth[:k].mean())


def evaluate_scores(scores: Mapping[Any, float], truth: Mapping[Any, bool]) -> MetricsReport:
    """Average precision, precision@100 and precision@T for one ranking.

    ``T`` is the number of truly mislabeled images; precision@100 uses
    ``min(100, N)`` on small datasets and records the k actually used.
    """
    ranked = rank(scores, truth)
    n = len(ranked.image_ids)
    t = int(ranked.truth.sum())
    if t == 0:
        raise EvaluationError("no mislabeled images in ground truth; metrics are undefined")
    curve = np.cumsum(ranked.truth) / np.arange(1, n + 1)
    k100 = min(100, n)
    return MetricsReport(
        average_precision=average_precision(scores, truth),
        precision_at_100=float(curve[k100 - 1]),
        precision_at_100_k=k100,
        precision_at_T=float(curve[t - 1]),
        T=t,
        num_images=n,
        precision_curve=curve.tolist(),
    )


def evaluate(score_path, manifest_path, column: str = "score", flag: str = "any") -> MetricsReport:
    """Evaluate one column of a score file against an injection manifest.

    ``flag`` selects the ground truth: ``any`` (image corrupted at all) or a
    single error type (``overlooked``, ``swapped``, ``badloc``).
    """
    scores = read_scores(score_path, column)
    _, manifest = read_manifest(manifest_path)
    return evaluate_scores(scores, manifest.truth(flag))
