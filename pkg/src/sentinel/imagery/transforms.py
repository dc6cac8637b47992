"""Pixel-space transforms: standard resize and seeded augmentation."""
from __future__ import annotations

import hashlib
import math

import numpy as np

from .records import (
    STANDARD_SIZE,
    Annotation,
    AugmentationSpec,
    InvalidRange,
    ZeroDimension,
)

# Fraction of the transformed box hull that must survive clipping for the
# annotation to be kept.
MIN_VISIBLE_AREA_FRACTION = 0.10


def _rng_for(seed: int, sample_index: int) -> np.random.Generator:
    # Hash to a stable 64-bit entropy value so negative seeds work too.
    digest = hashlib.blake2b(
        f"{seed}:{sample_index}".encode("ascii"), digest_size=8
    ).digest()
    return np.random.default_rng(int.from_bytes(digest, "big"))


def resize_bilinear(pixels: np.ndarray, target: tuple[int, int]) -> np.ndarray:
    """Bilinear resample to (width, height); uint8 in, uint8 out.

    Uses the half-pixel-center convention: src = (dst + 0.5) * scale - 0.5,
    clamped to the source grid.
    """
    tw, th = target
    if tw <= 0 or th <= 0:
        raise ZeroDimension(f"target size {tw}x{th}")
    if pixels.ndim not in (2, 3):
        raise ValueError(f"expected HxW or HxWxC buffer, got shape {pixels.shape}")
    sh, sw = pixels.shape[:2]
    if sh <= 0 or sw <= 0:
        raise ZeroDimension(f"source size {sw}x{sh}")
    if (sw, sh) == (tw, th):
        return pixels.copy()

    src_x = (np.arange(tw, dtype=np.float64) + 0.5) * (sw / tw) - 0.5
    src_y = (np.arange(th, dtype=np.float64) + 0.5) * (sh / th) - 0.5
    src_x = np.clip(src_x, 0.0, sw - 1.0)
    src_y = np.clip(src_y, 0.0, sh - 1.0)

    x0 = np.floor(src_x).astype(np.intp)
    y0 = np.floor(src_y).astype(np.intp)
    x1 = np.minimum(x0 + 1, sw - 1)
    y1 = np.minimum(y0 + 1, sh - 1)
    fx = (src_x - x0).reshape(1, tw)
    fy = (src_y - y0).reshape(th, 1)

    img = pixels.astype(np.float64)
    if img.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    top = img[y0[:, None], x0[None, :]] * (1 - fx) + img[y0[:, None], x1[None, :]] * fx
    bot = img[y1[:, None], x0[None, :]] * (1 - fx) + img[y1[:, None], x1[None, :]] * fx
    out = top * (1 - fy) + bot * fy
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def resize_to_standard(
    pixels: np.ndarray, target: tuple[int, int] = STANDARD_SIZE
) -> np.ndarray:
    """Resize to the canonical square input; normalized boxes need no change."""
    return resize_bilinear(pixels, target)


def _warp_affine(
    pixels: np.ndarray, scale: float, angle_deg: float
) -> np.ndarray:
    """Scale+rotate about the image center onto the same-size canvas.

    Positive angles rotate content clockwise on screen (y axis points down).
    Out-of-frame samples are filled with 0.
    """
    h, w = pixels.shape[:2]
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    theta = math.radians(angle_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)

    ys, xs = np.meshgrid(
        np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij"
    )
    # Inverse map: rotate by -theta, unscale.
    dx, dy = xs - cx, ys - cy
    sx = (cos_t * dx + sin_t * dy) / scale + cx
    sy = (-sin_t * dx + cos_t * dy) / scale + cy

    inside = (sx >= 0) & (sx <= w - 1) & (sy >= 0) & (sy <= h - 1)
    sx_c = np.clip(sx, 0.0, w - 1.0)
    sy_c = np.clip(sy, 0.0, h - 1.0)
    x0 = np.floor(sx_c).astype(np.intp)
    y0 = np.floor(sy_c).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = sx_c - x0
    fy = sy_c - y0

    img = pixels.astype(np.float64)
    if img.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
        inside = inside[..., None]
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    out = np.where(inside, top * (1 - fy) + bot * fy, 0.0)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def transform_box(
    ann: Annotation,
    width: int,
    height: int,
    scale: float,
    angle_deg: float,
) -> Annotation | None:
    """Map a box through scale+rotation: transformed corner hull, clipped.

    Returns None when the clipped hull keeps less than
    MIN_VISIBLE_AREA_FRACTION of the unclipped hull area.
    """
    x0n, y0n, x1n, y1n = ann.corners_norm()
    corners = np.array(
        [
            [x0n * width, y0n * height],
            [x1n * width, y0n * height],
            [x1n * width, y1n * height],
            [x0n * width, y1n * height],
        ],
        dtype=np.float64,
    )
    # Boxes live in the continuous [0,W]x[0,H] frame; its center is (W/2, H/2)
    # (the warp's (w-1)/2 is the same point in pixel-index coordinates).
    cx, cy = width / 2.0, height / 2.0
    theta = math.radians(angle_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    dx = corners[:, 0] - cx
    dy = corners[:, 1] - cy
    tx = cx + scale * (cos_t * dx - sin_t * dy)
    ty = cy + scale * (sin_t * dx + cos_t * dy)

    hx0, hx1 = float(tx.min()), float(tx.max())
    hy0, hy1 = float(ty.min()), float(ty.max())
    hull_area = (hx1 - hx0) * (hy1 - hy0)
    if hull_area <= 0.0:
        return None
    kx0, kx1 = max(hx0, 0.0), min(hx1, float(width))
    ky0, ky1 = max(hy0, 0.0), min(hy1, float(height))
    if kx1 - kx0 <= 0.0 or ky1 - ky0 <= 0.0:
        return None
    if (kx1 - kx0) * (ky1 - ky0) < MIN_VISIBLE_AREA_FRACTION * hull_area:
        return None
    return Annotation.clipped(
        ann.class_label,
        (kx0 + kx1) / 2.0 / width,
        (ky0 + ky1) / 2.0 / height,
        (kx1 - kx0) / width,
        (ky1 - ky0) / height,
    )


def augment(
    pixels: np.ndarray,
    annotations: list[Annotation],
    spec: AugmentationSpec,
    sample_index: int,
) -> tuple[np.ndarray, list[Annotation]]:
    """Apply one deterministic scale/rotation/brightness draw.

    Parameters are drawn from (spec.seed, sample_index) only, so repeated
    calls reproduce byte-identical outputs.
    """
    if pixels.size == 0:
        raise ZeroDimension("empty pixel buffer")
    for lo, hi in (spec.scale_range, spec.rotation_range_deg, spec.brightness_delta_range):
        if lo > hi:
            raise InvalidRange(f"range ({lo}, {hi})")

    rng = _rng_for(spec.seed, sample_index)
    scale = _draw(rng, spec.scale_range)
    angle = _draw(rng, spec.rotation_range_deg)
    brightness = _draw(rng, spec.brightness_delta_range)

    if scale == 1.0 and angle == 0.0:
        out = pixels.copy()
        new_anns = list(annotations)
    else:
        h, w = pixels.shape[:2]
        out = _warp_affine(pixels, scale, angle)
        new_anns = []
        for ann in annotations:
            moved = transform_box(ann, w, h, scale, angle)
            if moved is not None:
                new_anns.append(moved)

    if brightness != 0.0:
        shifted = out.astype(np.float64) + brightness * 255.0
        out = np.clip(np.rint(shifted), 0, 255).astype(np.uint8)
    return out, new_anns


def _draw(rng: np.random.Generator, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    if lo == hi:
        return float(lo)
    return float(rng.uniform(lo, hi))
