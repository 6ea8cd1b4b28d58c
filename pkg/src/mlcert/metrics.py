"""Object-detection evaluation: IoU, greedy matching, P/R/F1, AP and mAP."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import NoGroundTruth
from .evidence import Box, Detection, GroundTruthBox, PredictionSet

DEFAULT_IOU_THRESHOLD = 0.5


def iou(a: Box, b: Box) -> float:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union


@dataclass
class ClassMatch:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    gt_count: int = 0
    # (confidence, is_tp) in ranking order
    scored_detections: list[tuple[float, bool]] = field(default_factory=list)


@dataclass
class MatchResult:
    per_class: dict[str, ClassMatch]

    @property
    def tp(self) -> int:
        return sum(m.tp for m in self.per_class.values())

    @property
    def fp(self) -> int:
        return sum(m.fp for m in self.per_class.values())

    @property
    def fn(self) -> int:
        return sum(m.fn for m in self.per_class.values())


def match_detections(
    preds: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
) -> MatchResult:
    """Greedy confidence-ordered matching, per class and image.

    Detections are visited by descending confidence (ties keep input order).
    Each takes the still-unmatched ground truth of the same class and image
    with the highest IoU at or above the threshold (ties: first in input
    order); otherwise it is a false positive.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1], got {iou_threshold}")

    per_class: dict[str, ClassMatch] = {}
    gt_index: dict[tuple[str, str], list[int]] = {}
    for j, g in enumerate(gts):
        per_class.setdefault(g.label, ClassMatch()).gt_count += 1
        gt_index.setdefault((g.label, g.image_id), []).append(j)

    matched = [False] * len(gts)
    order = sorted(range(len(preds)), key=lambda i: -preds[i].confidence)
    for i in order:
        d = preds[i]
        cm = per_class.setdefault(d.label, ClassMatch())
        best_j, best_iou = -1, iou_threshold
        for j in gt_index.get((d.label, d.image_id), ()):
            if matched[j]:
                continue
            o = iou(d.box, gts[j].box)
            if o > best_iou or (o == best_iou and best_j < 0):
                best_j, best_iou = j, o
        if best_j >= 0:
            matched[best_j] = True
            cm.tp += 1
            cm.scored_detections.append((d.confidence, True))
        else:
            cm.fp += 1
            cm.scored_detections.append((d.confidence, False))

    for cm in per_class.values():
        cm.fn = cm.gt_count - cm.tp
    return MatchResult(per_class=dict(sorted(per_class.items())))


def _ratio(hits: int, misses: int) -> float:
    denom = hits + misses
    if denom == 0:
        return 1.0
    return hits / denom


def precision_recall_f1_counts(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Micro P/R/F1 from pooled counts; a ratio with an empty denominator is 1.0."""
    precision = _ratio(tp, fp)
    recall = _ratio(tp, fn)
    if precision + recall == 0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def precision_recall_f1(m: MatchResult) -> tuple[float, float, float]:
    return precision_recall_f1_counts(m.tp, m.fp, m.fn)


def average_precision(scored: Sequence[tuple[float, bool]], gt_count: int) -> float:
    """All-point interpolated AP over a ranked list of (confidence, is_tp)."""
    if gt_count < 0:
        raise ValueError("gt_count must be non-negative")
    if gt_count == 0:
        return 1.0 if len(scored) == 0 else 0.0

    # exact rationals, rounded once at the end
    precisions, recalls = [], []
    tp = 0
    for k, (_, hit) in enumerate(scored, start=1):
        tp += bool(hit)
        precisions.append(Fraction(tp, k))
        recalls.append(Fraction(tp, gt_count))

    # running max from the right gives the interpolated precision envelope
    for k in range(len(precisions) - 2, -1, -1):
        precisions[k] = max(precisions[k], precisions[k + 1])

    ap, prev_recall = Fraction(0), Fraction(0)
    for p, r in zip(precisions, recalls):
        if r > prev_recall:
            ap += (r - prev_recall) * p
            prev_recall = r
    return float(min(ap, Fraction(1)))


@dataclass(frozen=True)
class PerformanceMetrics:
    precision: float
    recall: float
    f1: float
    map_50: float
    per_class_ap: dict[str, float] = field(default_factory=dict)

    def get(self, name: str) -> float:
        if name not in ("precision", "recall", "f1", "map_50"):
            raise KeyError(f"unknown metric {name!r}")
        return getattr(self, name)


def evaluate_performance(p: PredictionSet, iou_threshold: float = DEFAULT_IOU_THRESHOLD) -> PerformanceMetrics:
    if p.ground_truth is None:
        raise NoGroundTruth(f"prediction set {p.run_id!r} has no ground truth")
    m = match_detections(p.detections, p.ground_truth, iou_threshold)
    precision, recall, f1 = precision_recall_f1(m)

    per_class_ap = {
        label: average_precision(cm.scored_detections, cm.gt_count)
        for label, cm in m.per_class.items()
        if cm.gt_count > 0
    }
    if per_class_ap:
        map_50 = sum(per_class_ap.values()) / len(per_class_ap)
    else:
        map_50 = 1.0 if not p.detections else 0.0
    return PerformanceMetrics(precision, recall, f1, map_50, per_class_ap)
