"""Axis-aligned box geometry: IoU, class-wise NMS, union area."""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

if TYPE_CHECKING:  # pragma: no cover
    from .core import Detection


@dataclass(frozen=True)
class BoundingBox:
    """Box corners in pixels, origin top-left, continuous coordinates."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(
                f"degenerate box ({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def clip(self, width: float, height: float) -> "BoundingBox | None":
        """Clip into [0,width]x[0,height]; None when nothing remains."""
        x0 = min(max(self.x_min, 0.0), width)
        x1 = min(max(self.x_max, 0.0), width)
        y0 = min(max(self.y_min, 0.0), height)
        y1 = min(max(self.y_max, 0.0), height)
        if x1 - x0 <= 0.0 or y1 - y0 <= 0.0:
            return None
        return BoundingBox(x0, y0, x1, y1)

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection area over union area; 0.0 for disjoint boxes."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def nms(dets: Sequence["Detection"], iou_threshold: float) -> list["Detection"]:
    """Greedy class-wise non-maximum suppression.

    Within each class the highest-confidence detection is kept and any
    remaining same-class detection with IoU >= iou_threshold against a kept
    one is dropped. Boxes of different classes never suppress each other.
    Output is sorted by descending confidence (ties by x_min, then y_min).
    """
    def order_key(d: "Detection"):
        return (-d.confidence, d.bbox.x_min, d.bbox.y_min)

    kept: list["Detection"] = []
    by_class: dict[str, list["Detection"]] = {}
    for det in dets:
        by_class.setdefault(det.class_label.value, []).append(det)
    for group in by_class.values():
        group_kept: list["Detection"] = []
        for det in sorted(group, key=order_key):
            if all(iou(det.bbox, k.bbox) < iou_threshold for k in group_kept):
                group_kept.append(det)
        kept.extend(group_kept)
    return sorted(kept, key=order_key)


def union_area(boxes: Iterable[BoundingBox]) -> float:
    """Exact area of the union of axis-aligned boxes (overlap counted once).

    Coordinate-compression sweep over x: per vertical slab, sum the union of
    the y-intervals of boxes spanning it.
    """
    boxes = list(boxes)
    if not boxes:
        return 0.0
    xs = sorted({b.x_min for b in boxes} | {b.x_max for b in boxes})
    total = 0.0
    for x0, x1 in zip(xs, xs[1:]):
        if x1 <= x0:
            continue
        intervals = sorted(
            (b.y_min, b.y_max) for b in boxes if b.x_min <= x0 and b.x_max >= x1
        )
        covered = 0.0
        cur_lo: float | None = None
        cur_hi = 0.0
        for lo, hi in intervals:
            if cur_lo is None:
                cur_lo, cur_hi = lo, hi
            elif lo <= cur_hi:
                cur_hi = max(cur_hi, hi)
            else:
                covered += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
        if cur_lo is not None:
            covered += cur_hi - cur_lo
        total += covered * (x1 - x0)
    return total
