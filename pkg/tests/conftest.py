from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from sentinel.detection import BoundingBox, Detection
from sentinel.imagery import Annotation, ClassLabel, ImageRecord, Source


def gradient_pixels(width: int, height: int, channels: int = 3) -> np.ndarray:
    """Smooth two-axis ramp, useful for resampling comparisons."""
    xs = np.linspace(0, 255, width)
    ys = np.linspace(0, 255, height)
    plane = (xs[None, :] * 0.6 + ys[:, None] * 0.4).astype(np.uint8)
    if channels == 1:
        return plane
    stacked = np.stack([plane, 255 - plane, np.roll(plane, width // 3, axis=1)], axis=-1)
    return stacked.astype(np.uint8)


def write_png(path: Path, pixels: np.ndarray) -> Path:
    mode = "L" if pixels.ndim == 2 else "RGB"
    Image.fromarray(pixels, mode=mode).save(path, format="PNG")
    return path


def write_jpeg(path: Path, pixels: np.ndarray) -> Path:
    mode = "L" if pixels.ndim == 2 else "RGB"
    Image.fromarray(pixels, mode=mode).save(path, format="JPEG", quality=92)
    return path


def make_record(
    image_id: str = "img",
    width: int = 416,
    height: int = 416,
    region: str | None = None,
    acquired_at: datetime | None = None,
) -> ImageRecord:
    return ImageRecord(
        id=image_id,
        source=Source.OTHER,
        acquired_at=acquired_at or datetime(2024, 7, 1, tzinfo=timezone.utc),
        width_px=width,
        height_px=height,
        pixel_ref=f"{image_id}.png",
        region_tag=region,
    )


def det(
    x0: float, y0: float, x1: float, y1: float, cls: ClassLabel, conf: float
) -> Detection:
    return Detection(BoundingBox(x0, y0, x1, y1), cls, conf)


def ann(cls: ClassLabel, cx: float, cy: float, w: float, h: float) -> Annotation:
    return Annotation(cls, (cx, cy, w, h))


def write_mock_script(path: Path, by_image: dict, model_id: str = "mock-yolo") -> Path:
    doc = {"model_id": model_id, **by_image}
    path.write_text(json.dumps(doc, indent=2), encoding="utf-8")
    return path


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240701)
