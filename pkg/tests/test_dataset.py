import itertools

import pytest

from labelaudit.dataset import (
    DatasetValidationError,
    IngestConfig,
    IngestError,
    load_annotations,
    load_predictions,
    min_similarity,
    write_annotations,
    write_predictions,
)
from labelaudit.geometry import BoundingBox, SimilarityParams, similarity
from labelaudit.synth import attach_predictions, make_synthetic_dataset, oracle_predictions

from conftest import ann, dataset, image, pred


def test_minimal_annotation_file(write_json):
    path = write_json("a.json", {
        "images": [{"id": 5, "width": 100, "height": 100}],
        "annotations": [{"image_id": 5, "category_id": 1, "bbox": [10, 10, 20, 20]}],
        "categories": [{"id": 1, "name": "thing"}],
    })
    ds = load_annotations(path)
    (im,) = ds.images
    assert im.image_id == 5 and im.predictions == ()
    assert im.annotations[0].box == BoundingBox(10, 10, 30, 30)
    assert im.annotations[0].class_id == 0


def test_category_remap_and_ordering(write_json, coco_doc):
    ds = load_annotations(write_json("a.json", coco_doc))
    assert ds.image_ids == [1, 2]
    assert [c.original_id for c in ds.categories] == [3, 7]
    assert ds[1].annotations[0].class_id == 0  # original 3
    assert ds[2].annotations[0].class_id == 1  # original 7
    for dense in range(ds.num_classes):
        assert ds.dense_class_id(ds.original_category_id(dense)) == dense


def test_empty_annotations_give_empty_labels(write_json, coco_doc):
    coco_doc["annotations"] = []
    ds = load_annotations(write_json("a.json", coco_doc))
    assert all(im.annotations == () for im in ds.images)


def test_unknown_image_id_is_a_validation_error(write_json, coco_doc):
    coco_doc["annotations"].append({"image_id": 99, "category_id": 3, "bbox": [1, 1, 2, 2]})
    with pytest.raises(DatasetValidationError) as info:
        load_annotations(write_json("a.json", coco_doc))
    report = info.value.report()
    assert any(r["image_id"] == 99 and r["severity"] == "error" for r in report)


@pytest.mark.parametrize("bbox", [[1, 1, 0, 5], [1, 1, 5, -2]])
def test_degenerate_box_is_a_validation_error(write_json, coco_doc, bbox):
    coco_doc["annotations"][0]["bbox"] = bbox
    with pytest.raises(DatasetValidationError):
        load_annotations(write_json("a.json", coco_doc))


def test_parse_error_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"images": [\n  {"id": 1,, }]}')
    with pytest.raises(IngestError, match="line 2"):
        load_annotations(path)


def test_out_of_bounds_box_is_clipped_with_warning(write_json, coco_doc):
    coco_doc["annotations"][0]["bbox"] = [90, 70, 20, 20]
    ds = load_annotations(write_json("a.json", coco_doc))
    assert ds[1].annotations[0].box == BoundingBox(90, 70, 100, 80)
    assert [i.severity for i in ds.issues] == ["warning"]
    with pytest.raises(DatasetValidationError):
        load_annotations(write_json("b.json", coco_doc), IngestConfig(clip_boxes=False))


def _preds(*entries):
    return [{"image_id": i, "category_id": c, "bbox": b, "score": s} for i, c, b, s in entries]


def test_tau_down_is_strict(write_json, coco_doc):
    ds = load_annotations(write_json("a.json", coco_doc))
    path = write_json("p.json", _preds((1, 3, [0, 0, 5, 5], 0.5), (1, 3, [0, 0, 6, 6], 0.51)))
    out = load_predictions(path, ds)
    assert [p.confidence for p in out[1].predictions] == [0.51]
    assert out[2].predictions == ()
    assert all(p.confidence > 0.5 for im in out.images for p in im.predictions)


def test_empty_results_and_wrapped_form(write_json, coco_doc):
    ds = load_annotations(write_json("a.json", coco_doc))
    assert all(im.predictions == () for im in load_predictions(write_json("p.json", []), ds).images)
    wrapped = {"info": {"x": 1}, "annotations": _preds((2, 7, [0, 0, 5, 5], 0.9))}
    assert len(load_predictions(write_json("w.json", wrapped), ds)[2].predictions) == 1


@pytest.mark.parametrize(
    "entry",
    [(42, 3, [0, 0, 5, 5], 0.9), (1, 3, [0, 0, 5, 5], 1.2), (1, 3, [0, 0, 5, 5], -0.1), (1, 99, [0, 0, 5, 5], 0.9)],
)
def test_bad_predictions_are_validation_errors(write_json, coco_doc, entry):
    ds = load_annotations(write_json("a.json", coco_doc))
    with pytest.raises(DatasetValidationError):
        load_predictions(write_json("p.json", _preds(entry)), ds)


def test_round_trip(tmp_path):
    clean = make_synthetic_dataset(30, seed=4)
    ds = attach_predictions(clean, oracle_predictions(clean, 0.9, jitter=0.1, seed=4))
    write_annotations(ds, tmp_path / "a.json")
    write_predictions(ds, tmp_path / "p.json")
    again = load_predictions(tmp_path / "p.json", load_annotations(tmp_path / "a.json"))
    assert again == ds
    # and a second trip through files is byte-stable
    write_annotations(again, tmp_path / "a2.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "a2.json").read_bytes()


def test_round_trip_from_float_coco_file(write_json, coco_doc, tmp_path):
    coco_doc["annotations"][0]["bbox"] = [1.6220623886563885, 3.3, 512.6788714987356, 7.1]
    coco_doc["images"][1]["width"] = 1000
    ds = load_annotations(write_json("a.json", coco_doc))
    write_annotations(ds, tmp_path / "b.json")
    assert load_annotations(tmp_path / "b.json") == ds


# ------------------------------------------------------------------- sim*


def _brute_min(ds, params=SimilarityParams()):
    values = [
        similarity(a.box, p.box, im.dims, params)
        for im in ds.images
        for a, p in itertools.product(im.annotations, im.predictions)
    ]
    return min(values) if values else 0.0


def test_min_similarity_single_identical_pair():
    ds = dataset([image([ann((0, 0, 2, 2))], [pred((0, 0, 2, 2))])])
    assert min_similarity(ds) == 1.0


def test_min_similarity_without_predictions_is_zero():
    ds = dataset([image([ann((0, 0, 2, 2))])])
    assert min_similarity(ds) == 0.0


def test_min_similarity_toy_dataset_matches_enumeration():
    im1 = image([ann((0, 0, 2, 2)), ann((6, 6, 9, 9), 1)], [pred((1, 1, 3, 3))], image_id=1)
    im2 = image([ann((0, 0, 10, 10))], [pred((0, 0, 5, 5), 1), pred((5, 5, 10, 10))], image_id=2)
    ds = dataset([im1, im2])
    assert min_similarity(ds) == _brute_min(ds)
    # never pairs boxes across images: cross-image pair (6,6,9,9)~(0,0,5,5) would be smaller
    assert min_similarity(ds) == similarity(im1.annotations[1].box, im1.predictions[0].box, im1.dims)


def test_min_similarity_monotone_under_nested_datasets():
    clean = make_synthetic_dataset(40, seed=9)
    ds = attach_predictions(clean, oracle_predictions(clean, 0.9, jitter=0.2, seed=9))
    values = [min_similarity(ds.images[:n]) for n in range(1, 41)]
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert values[-1] == _brute_min(ds)
    for im in ds.images:
        for a, p in itertools.product(im.annotations, im.predictions):
            assert values[-1] <= similarity(a.box, p.box, im.dims)


def test_dataset_rejects_duplicate_ids():
    with pytest.raises(ValueError):
        dataset([image(image_id=1), image(image_id=1)])
