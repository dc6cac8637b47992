"""Raster loading plus annotation/manifest file formats.

Annotation files: one text file per image, one line per object,
`<class_id> <cx> <cy> <w> <h>` with class ids 0=wildfire, 1=smoke.
Manifests are a single JSON document (see save_manifest).
"""
from __future__ import annotations

import json
import os
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .records import (
    CLASS_TO_ID,
    ID_TO_CLASS,
    Annotation,
    ClassLabel,
    DatasetManifest,
    ImageRecord,
    ManifestInvalid,
    Source,
    Split,
    UnreadableFile,
    UnsupportedFormat,
    ZeroDimension,
)

SUPPORTED_FORMATS = {"PNG", "JPEG", "TIFF", "BMP"}


def load_image(
    path: str | os.PathLike,
    *,
    image_id: str | None = None,
    source: Source = Source.OTHER,
    acquired_at: datetime | None = None,
    region_tag: str | None = None,
) -> tuple[ImageRecord, np.ndarray]:
    """Decode a raster file into a record plus a row-major uint8 buffer.

    Grayscale rasters come back as (H, W); everything else is converted
    to RGB (H, W, 3).
    """
    p = Path(path)
    try:
        with Image.open(p) as img:
            fmt = img.format
            if fmt not in SUPPORTED_FORMATS:
                raise UnsupportedFormat(f"{p}: format {fmt!r} not supported")
            if img.width <= 0 or img.height <= 0:
                raise ZeroDimension(f"{p}: {img.width}x{img.height}")
            if img.mode == "L":
                pixels = np.asarray(img, dtype=np.uint8)
            else:
                pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except FileNotFoundError as exc:
        raise UnreadableFile(f"{p}: no such file") from exc
    except UnidentifiedImageError as exc:
        raise UnreadableFile(f"{p}: not a decodable image") from exc
    except OSError as exc:
        raise UnreadableFile(f"{p}: {exc}") from exc

    if acquired_at is None:
        acquired_at = datetime.fromtimestamp(p.stat().st_mtime, tz=timezone.utc)
    record = ImageRecord(
        id=image_id or p.stem,
        source=source,
        acquired_at=acquired_at,
        width_px=pixels.shape[1],
        height_px=pixels.shape[0],
        pixel_ref=str(p),
        region_tag=region_tag,
    )
    return record, pixels


def write_annotations(path: str | os.PathLike, annotations: list[Annotation]) -> None:
    lines = []
    for ann in annotations:
        cx, cy, w, h = ann.bbox_norm
        lines.append(f"{CLASS_TO_ID[ann.class_label]} {cx:.6f} {cy:.6f} {w:.6f} {h:.6f}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="ascii")


def read_annotations(path: str | os.PathLike) -> list[Annotation]:
    annotations = []
    for lineno, line in enumerate(Path(path).read_text(encoding="ascii").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
        class_id = int(parts[0])
        if class_id not in ID_TO_CLASS:
            raise ValueError(f"{path}:{lineno}: unknown class id {class_id}")
        cx, cy, w, h = (float(v) for v in parts[1:])
        annotations.append(Annotation(ID_TO_CLASS[class_id], (cx, cy, w, h)))
    return annotations


def _record_to_dict(rec: ImageRecord, anns: list[Annotation]) -> dict:
    return {
        "id": rec.id,
        "source": rec.source.value,
        "acquired_at": rec.acquired_at.astimezone(timezone.utc).isoformat(),
        "width": rec.width_px,
        "height": rec.height_px,
        "pixel_ref": rec.pixel_ref,
        "region_tag": rec.region_tag,
        "annotations": [
            {"class": a.class_label.value, "bbox": list(a.bbox_norm)} for a in anns
        ],
    }


def manifest_to_dict(manifest: DatasetManifest) -> dict:
    return {
        "images": [_record_to_dict(rec, anns) for rec, anns in manifest.entries],
        "split_seed": manifest.split_seed,
        "splits": {i: s.value for i, s in manifest.split_of.items()},
    }


def save_manifest(manifest: DatasetManifest, path: str | os.PathLike) -> None:
    Path(path).write_text(
        json.dumps(manifest_to_dict(manifest), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def manifest_from_dict(doc: dict) -> DatasetManifest:
    try:
        entries = []
        for img in doc["images"]:
            rec = ImageRecord(
                id=img["id"],
                source=Source(img["source"]),
                acquired_at=datetime.fromisoformat(img["acquired_at"]),
                width_px=int(img["width"]),
                height_px=int(img["height"]),
                pixel_ref=img["pixel_ref"],
                region_tag=img.get("region_tag"),
            )
            anns = [
                Annotation(ClassLabel(a["class"]), tuple(float(v) for v in a["bbox"]))
                for a in img.get("annotations", [])
            ]
            entries.append((rec, anns))
        splits = {i: Split(s) for i, s in doc.get("splits", {}).items()}
        return DatasetManifest(
            entries=entries, split_of=splits, split_seed=doc.get("split_seed")
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestInvalid(f"bad manifest document: {exc}") from exc


def load_manifest(path: str | os.PathLike) -> DatasetManifest:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ManifestInvalid(f"{path}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise ManifestInvalid(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ManifestInvalid(f"{path}: top level must be an object")
    return manifest_from_dict(doc)
