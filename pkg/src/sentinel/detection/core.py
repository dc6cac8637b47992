"""Detection pipeline: decode backend output, filter, NMS, coverage."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, ImageDraw

from ..imagery import ClassLabel, ImageRecord, ZeroDimension, resize_bilinear
from .geometry import BoundingBox, nms, union_area


class DetectionError(Exception):
    """Base error for the detection pipeline."""


class MalformedBackendOutput(DetectionError):
    """Backend payload missing fields or carrying invalid values."""


class BackendUnavailable(DetectionError):
    """Remote endpoint down or model file unloadable."""


class InferenceTimeout(DetectionError):
    """Backend did not answer within the configured deadline."""


CLASS_COLORS = {ClassLabel.WILDFIRE: (220, 40, 40), ClassLabel.SMOKE: (128, 128, 128)}


@dataclass(frozen=True)
class Detection:
    bbox: BoundingBox
    class_label: ClassLabel
    confidence: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0,1]")

    def to_dict(self) -> dict:
        return {
            "box": self.bbox.as_list(),
            "class": self.class_label.value,
            "confidence": self.confidence,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Detection":
        box = d["box"]
        return cls(
            bbox=BoundingBox(float(box[0]), float(box[1]), float(box[2]), float(box[3])),
            class_label=ClassLabel(d["class"]),
            confidence=float(d["confidence"]),
        )


@dataclass(frozen=True)
class CoverageMetrics:
    """Percent of image area covered by the union of each class's boxes."""

    wildfire_coverage_pct: float
    smoke_coverage_pct: float

    def __post_init__(self) -> None:
        for v in (self.wildfire_coverage_pct, self.smoke_coverage_pct):
            if not (0.0 <= v <= 100.0):
                raise ValueError(f"coverage {v} outside [0,100]")

    def rounded(self) -> tuple[float, float]:
        """Two-decimal display values; full precision stays on the fields."""
        return (round(self.wildfire_coverage_pct, 2), round(self.smoke_coverage_pct, 2))

    def to_dict(self) -> dict:
        return {
            "wildfire_coverage_pct": self.wildfire_coverage_pct,
            "smoke_coverage_pct": self.smoke_coverage_pct,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CoverageMetrics":
        return cls(
            wildfire_coverage_pct=float(d["wildfire_coverage_pct"]),
            smoke_coverage_pct=float(d["smoke_coverage_pct"]),
        )


@dataclass(frozen=True)
class DetectorConfig:
    """Backend selector plus operating thresholds.

    backend spec strings: "mock:<script.json>", "remote:<url>",
    "model:<weights file>".
    """

    backend: str
    confidence_threshold: float = 0.25
    nms_iou_threshold: float = 0.5
    input_size: tuple[int, int] = (416, 416)
    timeout_s: float = 30.0

    def __post_init__(self) -> None:
        for name, v in (
            ("confidence_threshold", self.confidence_threshold),
            ("nms_iou_threshold", self.nms_iou_threshold),
        ):
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} {v} outside [0,1]")


@dataclass
class DetectionResult:
    image_id: str
    model_id: str
    detections: list[Detection]
    inference_ms: float
    coverage: CoverageMetrics

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "model_id": self.model_id,
            "detections": [d.to_dict() for d in self.detections],
            "inference_ms": self.inference_ms,
            "coverage": self.coverage.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DetectionResult":
        return cls(
            image_id=d["image_id"],
            model_id=d["model_id"],
            detections=[Detection.from_dict(x) for x in d["detections"]],
            inference_ms=float(d["inference_ms"]),
            coverage=CoverageMetrics.from_dict(d["coverage"]),
        )


def decode_and_filter(
    raw: list[dict],
    cfg: DetectorConfig,
    image_w: int,
    image_h: int,
) -> list[Detection]:
    """Turn raw backend triples into Detections in the original image frame.

    Drops detections below the confidence threshold, rescales from the
    backend's input_size frame to (image_w, image_h), and clips to bounds.
    """
    if not isinstance(raw, list):
        raise MalformedBackendOutput(f"expected a list of detections, got {type(raw).__name__}")
    in_w, in_h = cfg.input_size
    sx, sy = image_w / in_w, image_h / in_h
    out: list[Detection] = []
    for i, item in enumerate(raw):
        try:
            box = item["box"]
            label = ClassLabel(item["class"])
            conf = float(item["confidence"])
            x0, y0, x1, y1 = (float(v) for v in box)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedBackendOutput(f"detection #{i}: {exc}") from exc
        if not (0.0 <= conf <= 1.0):
            raise MalformedBackendOutput(f"detection #{i}: confidence {conf} outside [0,1]")
        if conf < cfg.confidence_threshold:
            continue
        if x1 <= x0 or y1 <= y0:
            raise MalformedBackendOutput(f"detection #{i}: degenerate box {box}")
        scaled = BoundingBox(x0 * sx, y0 * sy, x1 * sx, y1 * sy)
        clipped = scaled.clip(image_w, image_h)
        if clipped is None:
            continue
        out.append(Detection(bbox=clipped, class_label=label, confidence=conf))
    return out


def compute_coverage(
    dets: list[Detection], image_w: float, image_h: float
) -> CoverageMetrics:
    """Union area per class as a percentage of the image area."""
    if image_w <= 0 or image_h <= 0:
        raise ZeroDimension(f"image size {image_w}x{image_h}")
    total = float(image_w) * float(image_h)
    pct = {}
    for label in (ClassLabel.WILDFIRE, ClassLabel.SMOKE):
        boxes = [d.bbox for d in dets if d.class_label == label]
        pct[label] = 100.0 * union_area(boxes) / total
    return CoverageMetrics(
        wildfire_coverage_pct=min(pct[ClassLabel.WILDFIRE], 100.0),
        smoke_coverage_pct=min(pct[ClassLabel.SMOKE], 100.0),
    )


def detect(record: ImageRecord, pixels: np.ndarray, cfg: DetectorConfig, backend=None) -> DetectionResult:
    """Full single-image pipeline: resize, infer, decode, NMS, coverage."""
    from .backends import create_backend

    if backend is None:
        backend = create_backend(cfg)
    resized = resize_bilinear(pixels, cfg.input_size)
    start = time.perf_counter()
    raw = backend.infer(resized, record.id)
    inference_ms = (time.perf_counter() - start) * 1000.0
    dets = decode_and_filter(raw, cfg, record.width_px, record.height_px)
    dets = nms(dets, cfg.nms_iou_threshold)
    coverage = compute_coverage(dets, record.width_px, record.height_px)
    return DetectionResult(
        image_id=record.id,
        model_id=backend.model_id,
        detections=dets,
        inference_ms=inference_ms,
        coverage=coverage,
    )


def draw_detections(pixels: np.ndarray, detections: list[Detection]) -> np.ndarray:
    """Overlay class-colored boxes and confidence labels; returns RGB."""
    if pixels.ndim == 2:
        img = Image.fromarray(pixels, mode="L").convert("RGB")
    else:
        img = Image.fromarray(pixels, mode="RGB")
    draw = ImageDraw.Draw(img)
    for det in detections:
        color = CLASS_COLORS[det.class_label]
        b = det.bbox
        draw.rectangle([b.x_min, b.y_min, b.x_max, b.y_max], outline=color, width=2)
        draw.text(
            (b.x_min + 2, max(b.y_min - 12, 0)),
            f"{det.class_label.value} {det.confidence:.2f}",
            fill=color,
        )
    return np.asarray(img, dtype=np.uint8)
