import json

import pytest

from labelaudit.dataset import AnnotatedBox, Category, Dataset, ImageRecord, PredictedBox
from labelaudit.geometry import BoundingBox, ImageDims


def box(*coords):
    return BoundingBox(*map(float, coords))


def ann(coords, cls=0):
    return AnnotatedBox(box(*coords), cls)


def pred(coords, cls=0, conf=0.99):
    return PredictedBox(box(*coords), cls, conf)


def image(annotations=(), predictions=(), size=(10, 10), image_id=1):
    return ImageRecord(image_id, ImageDims(*size), tuple(annotations), tuple(predictions))


def dataset(images, num_classes=2):
    return Dataset(tuple(images), tuple(Category(i + 1, f"c{i}") for i in range(num_classes)))


@pytest.fixture
def write_json(tmp_path):
    def _write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return path

    return _write


@pytest.fixture
def coco_doc():
    return {
        "images": [
            {"id": 2, "width": 100, "height": 80, "file_name": "b.png"},
            {"id": 1, "width": 100, "height": 80, "file_name": "a.png"},
        ],
        "annotations": [
            {"id": 1, "image_id": 1, "category_id": 3, "bbox": [10, 10, 20, 20]},
            {"id": 2, "image_id": 2, "category_id": 7, "bbox": [0, 0, 50, 40]},
        ],
        "categories": [{"id": 7, "name": "dog"}, {"id": 3, "name": "cat"}],
    }
