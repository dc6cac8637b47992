"""Core dataset records: images, annotations, manifests, augmentation specs."""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum


class ImageryError(Exception):
    """Base error for imagery handling."""


class UnreadableFile(ImageryError):
    """File missing, empty, or not decodable as an image."""


class UnsupportedFormat(ImageryError):
    """Decodable file but not a supported raster format."""


class ZeroDimension(ImageryError):
    """Image or target with a zero/negative width or height."""


class EmptyManifest(ImageryError):
    """Operation requires at least one manifest entry."""


class InvalidRange(ImageryError):
    """Augmentation range with min > max or out-of-bounds endpoints."""


class ManifestInvalid(ImageryError):
    """Manifest file does not conform to the documented JSON schema."""


class Source(str, Enum):
    LANDSAT8 = "landsat8"
    GOES16 = "goes16"
    OTHER = "other"


class ClassLabel(str, Enum):
    WILDFIRE = "wildfire"
    SMOKE = "smoke"


class Split(str, Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


# Fixed class-id mapping used in annotation files.
CLASS_TO_ID = {ClassLabel.WILDFIRE: 0, ClassLabel.SMOKE: 1}
ID_TO_CLASS = {v: k for k, v in CLASS_TO_ID.items()}

STANDARD_SIZE = (416, 416)
SPLIT_RATIOS = (0.70, 0.15, 0.15)


@dataclass(frozen=True)
class ImageRecord:
    """Provenance and geometry of one satellite image."""

    id: str
    source: Source
    acquired_at: datetime
    width_px: int
    height_px: int
    pixel_ref: str
    region_tag: str | None = None

    def __post_init__(self) -> None:
        if self.width_px <= 0 or self.height_px <= 0:
            raise ZeroDimension(
                f"image {self.id!r} has dimensions {self.width_px}x{self.height_px}"
            )
        if self.acquired_at.tzinfo is None:
            object.__setattr__(
                self, "acquired_at", self.acquired_at.replace(tzinfo=timezone.utc)
            )


@dataclass(frozen=True)
class Annotation:
    """One labeled object: class plus normalized center-size box.

    bbox_norm is (cx, cy, w, h), each a fraction of the image dimensions,
    so annotations survive any resize unchanged.
    """

    class_label: ClassLabel
    bbox_norm: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        cx, cy, w, h = self.bbox_norm
        if not (0.0 <= cx <= 1.0 and 0.0 <= cy <= 1.0):
            raise ValueError(f"box center ({cx}, {cy}) outside [0,1]")
        if not (0.0 < w <= 1.0 and 0.0 < h <= 1.0):
            raise ValueError(f"box size ({w}, {h}) outside (0,1]")

    @classmethod
    def clipped(
        cls, class_label: ClassLabel, cx: float, cy: float, w: float, h: float
    ) -> "Annotation | None":
        """Clip corners into [0,1]^2 and rebuild; None if nothing remains."""
        x0 = min(max(cx - w / 2.0, 0.0), 1.0)
        x1 = min(max(cx + w / 2.0, 0.0), 1.0)
        y0 = min(max(cy - h / 2.0, 0.0), 1.0)
        y1 = min(max(cy + h / 2.0, 0.0), 1.0)
        if x1 - x0 <= 0.0 or y1 - y0 <= 0.0:
            return None
        return cls(class_label, ((x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0))

    def corners_norm(self) -> tuple[float, float, float, float]:
        """(x_min, y_min, x_max, y_max) in normalized coordinates."""
        cx, cy, w, h = self.bbox_norm
        return (cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)


@dataclass(frozen=True)
class AugmentationSpec:
    """Ranges for random scale / rotation / brightness draws.

    Brightness deltas are additive fractions of the 8-bit dynamic range.
    """

    scale_range: tuple[float, float] = (1.0, 1.0)
    rotation_range_deg: tuple[float, float] = (0.0, 0.0)
    brightness_delta_range: tuple[float, float] = (0.0, 0.0)
    seed: int = 0

    def __post_init__(self) -> None:
        for name, (lo, hi) in (
            ("scale_range", self.scale_range),
            ("rotation_range_deg", self.rotation_range_deg),
            ("brightness_delta_range", self.brightness_delta_range),
        ):
            if lo > hi:
                raise InvalidRange(f"{name}: min {lo} > max {hi}")
        blo, bhi = self.brightness_delta_range
        if blo < -1.0 or bhi > 1.0:
            raise InvalidRange("brightness deltas must lie in [-1, 1]")
        slo, _ = self.scale_range
        if slo <= 0.0:
            raise InvalidRange("scale factors must be positive")


@dataclass
class DatasetManifest:
    """All images + annotations of a dataset, with split bookkeeping."""

    entries: list[tuple[ImageRecord, list[Annotation]]]
    split_of: dict[str, Split] = field(default_factory=dict)
    split_seed: int | None = None
    ratios: tuple[float, float, float] = SPLIT_RATIOS

    def __post_init__(self) -> None:
        ids = [rec.id for rec, _ in self.entries]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate image ids in manifest: {dupes}")

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[str]:
        return [rec.id for rec, _ in self.entries]

    def entry(self, image_id: str) -> tuple[ImageRecord, list[Annotation]]:
        for rec, anns in self.entries:
            if rec.id == image_id:
                return rec, anns
        raise KeyError(image_id)

    def split_ids(self, split: Split) -> list[str]:
        return [i for i in self.ids() if self.split_of.get(i) == split]

    def split_counts(self) -> tuple[int, int, int]:
        return (
            len(self.split_ids(Split.TRAIN)),
            len(self.split_ids(Split.VAL)),
            len(self.split_ids(Split.TEST)),
        )
