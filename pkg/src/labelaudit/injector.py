"""Seeded synthetic label corruption.

Selected images receive at least one of three perturbations, each applied to
a different, uniformly chosen annotated box:

* ``drop``  -- remove the box (shows up as an Overlooked error),
* ``swap``  -- relabel the box with a uniformly chosen other class,
* ``shift`` -- translate the box by a fraction of its width/height (Badly
  Located error).

All randomness flows from one ``numpy.random.Generator`` seeded with
``InjectionSpec.seed`` and consumed in image-id order, so the corrupted
dataset and its manifest are a pure function of ``(clean, spec)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np

from .dataset import AnnotatedBox, Dataset, ImageRecord
from .geometry import BoundingBox

__all__ = ["InjectionSpec", "InjectionError", "ManifestEntry", "ErrorManifest", "inject_errors"]

ERROR_TYPES = ("drop", "swap", "shift")
_MAX_DRAWS = 1000


class InjectionError(Exception):
    pass


@dataclass(frozen=True)
class InjectionSpec:
    image_fraction: float = 0.22
    drop_prob: float = 1 / 3
    swap_prob: float = 1 / 3
    shift_prob: float = 1 / 3
    shift_range: tuple[float, float] = (0.25, 0.5)
    seed: int = 0
    forbid_empty: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.image_fraction <= 1.0:
            raise ValueError(f"image_fraction must lie in [0, 1], got {self.image_fraction}")
        probs = (self.drop_prob, self.swap_prob, self.shift_prob)
        if any(not 0.0 <= p <= 1.0 for p in probs) or not 0.0 < sum(probs) <= 1.0 + 1e-12:
            raise ValueError(f"error-type probabilities must be in [0, 1] with 0 < sum <= 1, got {probs}")
        lo, hi = self.shift_range
        if not 0.0 < lo <= hi <= 1.0:
            raise ValueError(f"shift_range must satisfy 0 < lo <= hi <= 1, got {self.shift_range}")

    @property
    def type_probs(self) -> dict[str, float]:
        return {"drop": self.drop_prob, "swap": self.swap_prob, "shift": self.shift_prob}

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["shift_range"] = list(self.shift_range)
        return d


@dataclass
class ManifestEntry:
    image_id: Any
    overlooked: bool = False
    swapped: bool = False
    badloc: bool = False
    details: list[dict[str, Any]] = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return self.overlooked or self.swapped or self.badloc

    def to_record(self) -> dict[str, Any]:
        return {
            "image_id": self.image_id,
            "overlooked": self.overlooked,
            "swapped": self.swapped,
            "badloc": self.badloc,
            "details": self.details,
        }

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> "ManifestEntry":
        return cls(rec["image_id"], bool(rec["overlooked"]), bool(rec["swapped"]), bool(rec["badloc"]),
                   list(rec.get("details", [])))


@dataclass
class ErrorManifest:
    """Ground truth of which images (and boxes) were corrupted."""

    entries: list[ManifestEntry]

    def __post_init__(self) -> None:
        self._by_id = {e.image_id: e for e in self.entries}

    def __getitem__(self, image_id: Any) -> ManifestEntry:
        return self._by_id[image_id]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def image_ids(self) -> list[Any]:
        return [e.image_id for e in self.entries]

    def truth(self, kind: str = "any") -> dict[Any, bool]:
        """Per-image ground-truth flags: ``any`` or one of ``overlooked``, ``swapped``, ``badloc``."""
        if kind == "any":
            return {e.image_id: e.flagged for e in self.entries}
        if kind not in ("overlooked", "swapped", "badloc"):
            raise ValueError(f"unknown flag {kind!r}")
        return {e.image_id: bool(getattr(e, kind)) for e in self.entries}

    @property
    def num_flagged(self) -> int:
        return sum(e.flagged for e in self.entries)


def _box_record(box: BoundingBox) -> list[float]:
    return list(box.as_tuple())


def _move_interval(lo: float, hi: float, delta: float, limit: float) -> tuple[float, float] | None:
    for d in (delta, -delta):
        a, b = min(max(lo + d, 0.0), limit), min(max(hi + d, 0.0), limit)
        if a < b:
            return a, b
    return None


def _shift(box: BoundingBox, rng: np.random.Generator, spec: InjectionSpec, width: int, height: int) -> BoundingBox | None:
    """Translate ``box`` and clip it to the image.

    An axis whose move would leave nothing inside the image is moved the
    other way instead.
    """
    lo, hi = spec.shift_range
    mag = rng.uniform(lo, hi, size=2) * np.array([box.width, box.height])
    sign = np.where(rng.random(2) < 0.5, -1.0, 1.0)
    xs = _move_interval(box.x1, box.x2, float(mag[0] * sign[0]), float(width))
    ys = _move_interval(box.y1, box.y2, float(mag[1] * sign[1]), float(height))
    if xs is None or ys is None:
        return None
    moved = BoundingBox(xs[0], ys[0], xs[1], ys[1])
    return None if moved == box else moved


def _corrupt_image(
    image: ImageRecord, kinds: list[str], rng: np.random.Generator, spec: InjectionSpec, dataset: Dataset
) -> tuple[ImageRecord, ManifestEntry]:
    boxes: list[tuple[int, AnnotatedBox]] = list(enumerate(image.annotations))
    untouched = [i for i, _ in boxes]
    entry = ManifestEntry(image.image_id)
    k = dataset.num_classes

    def pick() -> int | None:
        if not untouched:
            return None
        return untouched.pop(int(rng.integers(len(untouched))))

    for kind in kinds:
        if kind == "drop":
            if spec.forbid_empty and len(boxes) <= 1:
                continue
            idx = pick()
            if idx is None:
                continue
            pos = next(p for p, (i, _) in enumerate(boxes) if i == idx)
            _, ann = boxes.pop(pos)
            entry.overlooked = True
            entry.details.append({"type": "drop", "box_index": idx, "bbox": _box_record(ann.box),
                                  "category_id": dataset.original_category_id(ann.class_id)})
        elif kind == "swap":
            if k < 2:
                continue
            idx = pick()
            if idx is None:
                continue
            pos = next(p for p, (i, _) in enumerate(boxes) if i == idx)
            ann = boxes[pos][1]
            others = [c for c in range(k) if c != ann.class_id]
            new = others[int(rng.integers(len(others)))]
            boxes[pos] = (idx, replace(ann, class_id=new))
            entry.swapped = True
            entry.details.append({"type": "swap", "box_index": idx, "bbox": _box_record(ann.box),
                                  "from_category_id": dataset.original_category_id(ann.class_id),
                                  "to_category_id": dataset.original_category_id(new)})
        elif kind == "shift":
            idx = pick()
            if idx is None:
                continue
            pos = next(p for p, (i, _) in enumerate(boxes) if i == idx)
            ann = boxes[pos][1]
            moved = _shift(ann.box, rng, spec, image.dims.width, image.dims.height)
            if moved is None:
                continue
            boxes[pos] = (idx, replace(ann, box=moved))
            entry.badloc = True
            entry.details.append({"type": "shift", "box_index": idx, "from_bbox": _box_record(ann.box),
                                  "to_bbox": _box_record(moved),
                                  "category_id": dataset.original_category_id(ann.class_id)})
    corrupted = replace(image, annotations=tuple(a for _, a in boxes))
    return corrupted, entry


def inject_errors(clean: Dataset, spec: InjectionSpec) -> tuple[Dataset, ErrorManifest]:
    """Corrupt a random subset of images of ``clean``.

    Each image with at least one annotation is selected with probability
    ``spec.image_fraction``. For a selected image every error type is drawn
    independently with its own probability, redrawing until at least one
    perturbation actually applies. Predictions on ``clean`` are discarded.
    """
    if spec.image_fraction > 0 and not any(im.annotations for im in clean.images):
        raise InjectionError("cannot inject errors into a dataset without annotated boxes")
    rng = np.random.default_rng(spec.seed)
    probs = spec.type_probs
    images, entries = [], []
    for image in clean.images:
        image = replace(image, predictions=())
        if not image.annotations or not rng.random() < spec.image_fraction:
            images.append(image)
            entries.append(ManifestEntry(image.image_id))
            continue
        for _ in range(_MAX_DRAWS):
            kinds = [t for t in ERROR_TYPES if rng.random() < probs[t]]
            if not kinds:
                continue
            corrupted, entry = _corrupt_image(image, kinds, rng, spec, clean)
            if entry.flagged:
                break
        else:
            raise InjectionError(f"image {image.image_id!r}: no configured error type can be applied")
        images.append(corrupted)
        entries.append(entry)
    return clean.with_images(images), ErrorManifest(entries)
