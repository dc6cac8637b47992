from .backends import (
    BackendPool,
    DetectorBackend,
    MockBackend,
    ModelFileBackend,
    RemoteBackend,
    create_backend,
)
from .core import (
    BackendUnavailable,
    CoverageMetrics,
    Detection,
    DetectionError,
    DetectionResult,
    DetectorConfig,
    InferenceTimeout,
    MalformedBackendOutput,
    compute_coverage,
    decode_and_filter,
    detect,
    draw_detections,
)
from .geometry import BoundingBox, iou, nms, union_area

__all__ = [
    "BackendPool",
    "DetectorBackend",
    "MockBackend",
    "ModelFileBackend",
    "RemoteBackend",
    "create_backend",
    "BackendUnavailable",
    "CoverageMetrics",
    "Detection",
    "DetectionError",
    "DetectionResult",
    "DetectorConfig",
    "InferenceTimeout",
    "MalformedBackendOutput",
    "compute_coverage",
    "decode_and_filter",
    "detect",
    "draw_detections",
    "BoundingBox",
    "iou",
    "nms",
    "union_area",
]
