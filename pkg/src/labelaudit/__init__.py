"""Label-quality auditing for object-detection datasets."""

__version__ = "0.1.0"

from .baselines import ClodConfig, MapConfig, TileConfig, clod_clusters, clod_score, per_image_map, tile_score
from .dataset import (
    AnnotatedBox,
    Dataset,
    ImageRecord,
    IngestConfig,
    PredictedBox,
    load_annotations,
    load_predictions,
    min_similarity,
)
from .evaluator import average_precision, evaluate, evaluate_scores, precision_at_k
from .geometry import BoundingBox, ImageDims, SimilarityParams, gaussian_kernel, iou, similarity
from .injector import ErrorManifest, InjectionSpec, inject_errors
from .objectlab import ImageScore, ScoringConfig, objectlab_score, score_dataset, softmin

__all__ = [
    "AnnotatedBox",
    "BoundingBox",
    "ClodConfig",
    "Dataset",
    "ErrorManifest",
    "ImageDims",
    "ImageRecord",
    "ImageScore",
    "IngestConfig",
    "InjectionSpec",
    "MapConfig",
    "PredictedBox",
    "ScoringConfig",
    "SimilarityParams",
    "TileConfig",
    "average_precision",
    "clod_clusters",
    "clod_score",
    "evaluate",
    "evaluate_scores",
    "gaussian_kernel",
    "inject_errors",
    "iou",
    "load_annotations",
    "load_predictions",
    "min_similarity",
    "objectlab_score",
    "per_image_map",
    "precision_at_k",
    "score_dataset",
    "similarity",
    "softmin",
    "tile_score",
]
