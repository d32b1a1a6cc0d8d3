"""Bounding-box primitives.

Boxes use the ``xyxy`` corner convention in pixel space: ``(x1, y1)`` is the
top-left corner and ``(x2, y2)`` the bottom-right one. Other formats are
converted at ingestion time (see :mod:`labelaudit.dataset`).

The scalar functions (:func:`iou`, :func:`gaussian_kernel`, :func:`similarity`)
are thin wrappers over the pairwise matrix versions, so both paths give
bit-identical values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BoundingBox",
    "ImageDims",
    "SimilarityParams",
    "as_array",
    "iou",
    "iou_matrix",
    "corner_vector",
    "corner_matrix",
    "gaussian_kernel",
    "kernel_matrix",
    "similarity",
    "similarity_matrix",
]


@dataclass(frozen=True, order=True)
class BoundingBox:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"box coordinates must be finite, got {coords}")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(f"box must have positive area, got {coords}")

    @classmethod
    def from_xywh(cls, x: float, y: float, w: float, h: float) -> "BoundingBox":
        return cls(float(x), float(y), float(x) + float(w), float(y) + float(h))

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    def to_xywh(self) -> list[float]:
        """Return ``[x, y, w, h]`` such that :meth:`from_xywh` restores this box exactly."""
        return [self.x1, self.y1, _exact_span(self.x1, self.x2), _exact_span(self.y1, self.y2)]

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)


def _exact_span(lo: float, hi: float) -> float:
    # Nudge hi - lo until lo + span == hi in float arithmetic. Always succeeds
    # when hi was itself computed as lo + w, i.e. for boxes read from xywh.
    span = hi - lo
    if lo + span == hi:
        return span
    for direction in (math.inf, -math.inf):
        s = span
        for _ in range(16):
            s = math.nextafter(s, direction)
            if lo + s == hi:
                return s
    return span


@dataclass(frozen=True)
class ImageDims:
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be >= 1, got {self.width}x{self.height}")


@dataclass(frozen=True)
class SimilarityParams:
    """Weights of the composite box similarity.

    ``alpha`` mixes the corner kernel with IoU, ``sigma`` is the kernel bandwidth
    in normalized image units.
    """

    alpha: float = 0.1
    sigma: float = 0.1

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def as_array(boxes: Iterable[BoundingBox] | np.ndarray) -> np.ndarray:
    """Stack boxes into an ``(N, 4)`` float array."""
    if isinstance(boxes, np.ndarray):
        return np.asarray(boxes, dtype=float).reshape(-1, 4)
    rows = [b.as_tuple() for b in boxes]
    return np.asarray(rows, dtype=float).reshape(-1, 4)


def iou_matrix(a: Sequence[BoundingBox] | np.ndarray, b: Sequence[BoundingBox] | np.ndarray) -> np.ndarray:
    """Pairwise IoU between two box sets, shape ``(len(a), len(b))``."""
    a = as_array(a)
    b = as_array(b)
    ix1 = np.maximum(a[:, None, 0], b[None, :, 0])
    iy1 = np.maximum(a[:, None, 1], b[None, :, 1])
    ix2 = np.minimum(a[:, None, 2], b[None, :, 2])
    iy2 = np.minimum(a[:, None, 3], b[None, :, 3])
    inter = np.clip(ix2 - ix1, 0.0, None) * np.clip(iy2 - iy1, 0.0, None)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    return inter / union


def corner_matrix(boxes: Sequence[BoundingBox] | np.ndarray, dims: ImageDims) -> np.ndarray:
    """Corner vectors normalized by image size, shape ``(N, 4)``."""
    arr = as_array(boxes)
    scale = np.array([dims.width, dims.height, dims.width, dims.height], dtype=float)
    return arr / scale


def kernel_matrix(
    a: Sequence[BoundingBox] | np.ndarray,
    b: Sequence[BoundingBox] | np.ndarray,
    dims: ImageDims,
    sigma: float = 0.1,
) -> np.ndarray:
    """Pairwise ``exp(-||ca - cb|| / sigma)`` over normalized corner vectors.

    The exponent uses the plain Euclidean norm, not its square.
    """
    ca = corner_matrix(a, dims)
    cb = corner_matrix(b, dims)
    diff = ca[:, None, :] - cb[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    return np.exp(-dist / sigma)


def similarity_matrix(
    a: Sequence[BoundingBox] | np.ndarray,
    b: Sequence[BoundingBox] | np.ndarray,
    dims: ImageDims,
    params: SimilarityParams = SimilarityParams(),
) -> np.ndarray:
    """Pairwise ``alpha * kernel + (1 - alpha) * IoU``."""
    k = kernel_matrix(a, b, dims, params.sigma)
    return params.alpha * k + (1.0 - params.alpha) * iou_matrix(a, b)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    return float(iou_matrix([a], [b])[0, 0])


def corner_vector(box: BoundingBox, dims: ImageDims) -> tuple[float, float, float, float]:
    return tuple(float(v) for v in corner_matrix([box], dims)[0])  # type: ignore[return-value]


def gaussian_kernel(a: BoundingBox, b: BoundingBox, dims: ImageDims, sigma: float = 0.1) -> float:
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return float(kernel_matrix([a], [b], dims, sigma)[0, 0])


def similarity(
    a: BoundingBox,
    b: BoundingBox,
    dims: ImageDims,
    params: SimilarityParams = SimilarityParams(),
) -> float:
    return float(similarity_matrix([a], [b], dims, params)[0, 0])
