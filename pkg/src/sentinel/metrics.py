"""Detection scoring: greedy matching, PR curves, AP/mAP, and F1.

Matching uses mAP@0.5 semantics (single IoU threshold, greedy assignment in
descending confidence). AP integrates the full precision envelope over
recall (all-points interpolation, not 11-point).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .detection import BoundingBox, Detection, DetectionResult, iou
from .imagery import Annotation, ClassLabel, DatasetManifest, ImageRecord, Split


class MetricsError(Exception):
    pass


class NoGroundTruth(MetricsError):
    pass


class EmptyCurve(MetricsError):
    pass


class MissingResults(MetricsError):
    def __init__(self, missing_ids: list[str]):
        self.missing_ids = missing_ids
        super().__init__(f"no detection results for: {', '.join(missing_ids)}")


class Flag(str, Enum):
    TP = "tp"
    FP = "fp"


# One labeled ground-truth box in pixel coordinates.
GroundTruth = tuple[ClassLabel, BoundingBox]


@dataclass
class MatchOutcome:
    flags: list[Flag]
    matched_gt: list[int | None]
    fn_count: int
    iou_threshold: float
    # Detections in the processing order the flags refer to.
    ordered: list[Detection] = field(default_factory=list)

    @property
    def tp_count(self) -> int:
        return sum(1 for f in self.flags if f is Flag.TP)

    @property
    def fp_count(self) -> int:
        return sum(1 for f in self.flags if f is Flag.FP)


@dataclass(frozen=True)
class PRPoint:
    confidence_cut: float
    precision: float
    recall: float


@dataclass
class MetricsReport:
    model_id: str
    per_class_ap: dict[str, float]
    map_50: float
    precision_pct: float
    recall_pct: float
    f1_pct: float
    counts: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "per_class_ap": dict(self.per_class_ap),
            "map_50": self.map_50,
            "precision_pct": self.precision_pct,
            "recall_pct": self.recall_pct,
            "f1_pct": self.f1_pct,
            "counts": dict(self.counts),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(
            model_id=d["model_id"],
            per_class_ap={k: float(v) for k, v in d["per_class_ap"].items()},
            map_50=float(d["map_50"]),
            precision_pct=float(d["precision_pct"]),
            recall_pct=float(d["recall_pct"]),
            f1_pct=float(d["f1_pct"]),
            counts={k: int(v) for k, v in d["counts"].items()},
        )


def _det_order(d: Detection):
    # Confidence ties broken by box coordinates for reproducible runs.
    return (-d.confidence, d.bbox.x_min, d.bbox.y_min)


def match_detections(
    dets: list[Detection],
    gts: list[GroundTruth],
    iou_threshold: float = 0.5,
) -> MatchOutcome:
    """Greedy one-to-one matching within a single image.

    Detections are visited in descending confidence; each takes its
    best-IoU unmatched same-class ground truth and is a TP iff that IoU
    reaches the threshold. Every ground truth matches at most once.
    """
    ordered = sorted(dets, key=_det_order)
    taken = [False] * len(gts)
    flags: list[Flag] = []
    matched: list[int | None] = []
    for det in ordered:
        best_iou = 0.0
        best_idx: int | None = None
        for gi, (g_label, g_box) in enumerate(gts):
            if taken[gi] or g_label != det.class_label:
                continue
            overlap = iou(det.bbox, g_box)
            if overlap > best_iou:
                best_iou = overlap
                best_idx = gi
        if best_idx is not None and best_iou >= iou_threshold:
            taken[best_idx] = True
            flags.append(Flag.TP)
            matched.append(best_idx)
        else:
            flags.append(Flag.FP)
            matched.append(None)
    return MatchOutcome(
        flags=flags,
        matched_gt=matched,
        fn_count=taken.count(False),
        iou_threshold=iou_threshold,
        ordered=ordered,
    )


def pr_curve(scored: list[tuple[float, bool]], total_gt: int) -> list[PRPoint]:
    """Cumulative precision/recall swept over every distinct confidence.

    `scored` holds (confidence, is_true_positive) pairs pooled over the
    dataset.
    """
    if total_gt <= 0:
        raise NoGroundTruth("total_gt must be positive")
    ordered = sorted(scored, key=lambda t: -t[0])
    points: list[PRPoint] = []
    tp = fp = 0
    for i, (conf, is_tp) in enumerate(ordered):
        if is_tp:
            tp += 1
        else:
            fp += 1
        is_last_of_cut = i + 1 == len(ordered) or ordered[i + 1][0] != conf
        if is_last_of_cut:
            points.append(
                PRPoint(
                    confidence_cut=conf,
                    precision=tp / (tp + fp),
                    recall=tp / total_gt,
                )
            )
    return points


def average_precision(curve: list[PRPoint]) -> float:
    """Area under the precision envelope (all-points interpolation)."""
    if not curve:
        raise EmptyCurve("cannot integrate an empty curve")
    pts = sorted(curve, key=lambda p: p.recall)
    # Envelope: max precision at recall >= r, computed right-to-left.
    envelope = [0.0] * len(pts)
    best = 0.0
    for i in range(len(pts) - 1, -1, -1):
        best = max(best, pts[i].precision)
        envelope[i] = best
    ap = 0.0
    prev_recall = 0.0
    for p, env in zip(pts, envelope):
        if p.recall > prev_recall:
            ap += (p.recall - prev_recall) * env
            prev_recall = p.recall
    return ap


def f1(precision_pct: float, recall_pct: float) -> float:
    """Harmonic mean in percentage units, rounded to one decimal."""
    if precision_pct == 0.0 and recall_pct == 0.0:
        return 0.0
    return round(
        2.0 * precision_pct * recall_pct / (precision_pct + recall_pct), 1
    )


def evaluate_model(
    manifest: DatasetManifest,
    results: list[DetectionResult],
    iou_threshold: float = 0.5,
    split: Split = Split.TEST,
) -> MetricsReport:
    """Score one model's results against a manifest split.

    Per-class AP over the split (classes with no ground truth anywhere are
    skipped), mAP as their mean, and micro-averaged P/R/F1 over all boxes at
    the detector's operating threshold.
    """
    split_ids = manifest.split_ids(split) if manifest.split_of else manifest.ids()
    by_image = {r.image_id: r for r in results}
    missing = [i for i in split_ids if i not in by_image]
    if missing:
        raise MissingResults(missing)

    scored_by_class: dict[ClassLabel, list[tuple[float, bool]]] = {
        c: [] for c in ClassLabel
    }
    gt_by_class: dict[ClassLabel, int] = {c: 0 for c in ClassLabel}
    tp = fp = total_gt = total_dets = 0

    for image_id in split_ids:
        record, anns = manifest.entry(image_id)
        gts = [
            (a.class_label, _annotation_to_pixels(a, record)) for a in anns
        ]
        outcome = match_detections(by_image[image_id].detections, gts, iou_threshold)
        for det, flag in zip(outcome.ordered, outcome.flags):
            scored_by_class[det.class_label].append(
                (det.confidence, flag is Flag.TP)
            )
        for label, _ in gts:
            gt_by_class[label] += 1
        tp += outcome.tp_count
        fp += outcome.fp_count
        total_gt += len(gts)
        total_dets += len(outcome.flags)

    per_class_ap: dict[str, float] = {}
    for label in ClassLabel:
        if gt_by_class[label] == 0:
            continue
        scored = scored_by_class[label]
        if not scored:
            per_class_ap[label.value] = 0.0
        else:
            per_class_ap[label.value] = average_precision(
                pr_curve(scored, gt_by_class[label])
            )
    map_50 = (
        sum(per_class_ap.values()) / len(per_class_ap) if per_class_ap else 0.0
    )

    precision_pct = 100.0 * tp / total_dets if total_dets else 0.0
    recall_pct = 100.0 * tp / total_gt if total_gt else 0.0
    model_id = results[0].model_id if results else "unknown"
    return MetricsReport(
        model_id=model_id,
        per_class_ap=per_class_ap,
        map_50=map_50,
        precision_pct=precision_pct,
        recall_pct=recall_pct,
        f1_pct=f1(precision_pct, recall_pct),
        counts={
            "images": len(split_ids),
            "ground_truths": total_gt,
            "detections": total_dets,
        },
    )


def _annotation_to_pixels(ann: Annotation, record: ImageRecord) -> BoundingBox:
    x0, y0, x1, y1 = ann.corners_norm()
    return BoundingBox(
        x0 * record.width_px, y0 * record.height_px,
        x1 * record.width_px, y1 * record.height_px,
    )


def format_table(reports: list[MetricsReport]) -> str:
    """Aligned plain-text table: Model | mAP(%) | Prec(%) | Rec(%) | F1(%)."""
    headers = ("Model", "mAP(%)", "Prec(%)", "Rec(%)", "F1(%)")
    rows = [
        (
            r.model_id,
            f"{100.0 * r.map_50:.1f}",
            f"{r.precision_pct:.1f}",
            f"{r.recall_pct:.1f}",
            f"{r.f1_pct:.1f}",
        )
        for r in reports
    ]
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in rows)) if rows else len(headers[i])
        for i in range(len(headers))
    ]
    def fmt(cells) -> str:
        return " | ".join(c.ljust(w) for c, w in zip(cells, widths))

    lines = [fmt(headers), "-+-".join("-" * w for w in widths)]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines)
