"""Neighborhood-relaxed change-detection metrics and flow PCK.

A ground-truth positive counts as detected when any valid predicted-positive
pixel lies inside the (2r+1)x(2r+1) square centered on it (clipped at the
borders). Valid ground-truth negatives inside any such square are removed
from the evaluation entirely; the remaining negatives contribute FP/TN
per pixel. At radius 0 this reduces to the standard confusion matrix.
Invalid pixels never contribute to any count, on either side.

PCK-delta is the percentage of valid pixels whose flow endpoint error is at
most delta * max(H, W) pixels (boundary inclusive).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import maximum_filter

from .core.sampling import ensure_flow, ensure_mask
from .errors import ShapeError, UndefinedMetricError

DEFAULT_RADII = (0, 5)
DEFAULT_DELTA = 0.05
DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class RelaxedConfusion:
    """Pixel counts of the radius-relaxed confusion matrix."""

    tp: int
    fn: int
    fp: int
    tn: int
    masked_out: int
    radius: int

    def __add__(self, other: "RelaxedConfusion") -> "RelaxedConfusion":
        if self.radius != other.radius:
            raise ValueError(f"cannot merge radii {self.radius} and {other.radius}")
        return RelaxedConfusion(
            self.tp + other.tp,
            self.fn + other.fn,
            self.fp + other.fp,
            self.tn + other.tn,
            self.masked_out + other.masked_out,
            self.radius,
        )


@dataclass
class MetricReport:
    """Percentage metrics at one radius; None marks an undefined (0/0) value."""

    radius: int
    precision: float | None
    recall: float | None
    f1: float | None
    iou: float | None
    oa: float | None
    pck: float | None = None
    delta: float = DEFAULT_DELTA


def _dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    if radius == 0:
        return mask.astype(bool)
    return maximum_filter(mask.astype(np.uint8), size=2 * radius + 1, mode="constant") > 0


def relaxed_confusion(
    pred: np.ndarray, gt: np.ndarray, valid: np.ndarray, radius: int
) -> RelaxedConfusion:
    """Radius-relaxed confusion counts for one sample."""
    pred = ensure_mask(pred)
    gt = ensure_mask(gt)
    valid = ensure_mask(valid)
    if not (pred.shape == gt.shape == valid.shape):
        raise ShapeError(
            f"prediction {pred.shape}, ground truth {gt.shape} and mask {valid.shape} differ"
        )
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    v = valid.astype(bool)
    gt_pos = (gt == 1) & v
    gt_neg = (gt == 0) & v
    pred_pos = (pred == 1) & v

    near_pred = _dilate(pred_pos, radius)
    tp = int(np.sum(gt_pos & near_pred))
    fn = int(gt_pos.sum()) - tp

    near_gt_pos = _dilate(gt_pos, radius)
    masked = gt_neg & near_gt_pos
    remaining = gt_neg & ~near_gt_pos
    fp = int(np.sum(remaining & pred_pos))
    tn = int(remaining.sum()) - fp
    return RelaxedConfusion(tp, fn, fp, tn, int(masked.sum()), radius)


def _pct(num: float, den: float) -> float | None:
    if den == 0:
        return None
    return 100.0 * num / den


def metrics_from_confusion(c: RelaxedConfusion, delta: float = DEFAULT_DELTA) -> MetricReport:
    """Precision, recall, F1, IoU and overall accuracy as percentages.

    Any 0/0 ratio is reported as None. F1 is 0 when precision and recall are
    both defined and zero, and None when either is undefined.
    """
    precision = _pct(c.tp, c.tp + c.fp)
    recall = _pct(c.tp, c.tp + c.fn)
    if precision is None or recall is None:
        f1 = None
    elif precision == 0.0 and recall == 0.0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    iou = _pct(c.tp, c.tp + c.fp + c.fn)
    oa = _pct(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn)
    return MetricReport(c.radius, precision, recall, f1, iou, oa, pck=None, delta=delta)


def pck(
    pred_flow: np.ndarray,
    gt_flow: np.ndarray,
    valid: np.ndarray,
    delta: float = DEFAULT_DELTA,
) -> float:
    """Percentage of valid pixels with endpoint error <= delta * max(H, W)."""
    correct, total = pck_counts(pred_flow, gt_flow, valid, delta)
    if total == 0:
        raise UndefinedMetricError("PCK undefined: validity mask is empty")
    return 100.0 * correct / total


def pck_counts(
    pred_flow: np.ndarray,
    gt_flow: np.ndarray,
    valid: np.ndarray,
    delta: float = DEFAULT_DELTA,
) -> tuple[int, int]:
    """(correct, total) pixel counts behind PCK, for micro-averaging."""
    pred_flow = ensure_flow(pred_flow)
    gt_flow = ensure_flow(gt_flow)
    valid = ensure_mask(valid)
    if pred_flow.shape != gt_flow.shape or pred_flow.shape[:2] != valid.shape:
        raise ShapeError(
            f"flows {pred_flow.shape}/{gt_flow.shape} and mask {valid.shape} disagree"
        )
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    h, w = valid.shape
    threshold = delta * max(h, w)
    diff = pred_flow.astype(np.float64) - gt_flow.astype(np.float64)
    err = np.hypot(diff[..., 0], diff[..., 1])
    v = valid == 1
    return int(np.sum(v & (err <= threshold))), int(v.sum())


def binarize_change_prob(prob: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Binary change mask from a two-channel probability map."""
    p = np.asarray(prob)
    if p.ndim != 3 or p.shape[2] != 2:
        raise ShapeError(f"probability map must be (H, W, 2), got {p.shape}")
    return (p[..., 1] >= threshold).astype(np.uint8)


def evaluate_sample(
    pred_prob: np.ndarray,
    pred_flow: np.ndarray,
    gt_change: np.ndarray,
    gt_flow: np.ndarray,
    valid: np.ndarray,
    radii: tuple[int, ...] = DEFAULT_RADII,
    delta: float = DEFAULT_DELTA,
    threshold: float = DEFAULT_THRESHOLD,
) -> list[MetricReport]:
    """Reports at each radius for one sample, all embedding the shared PCK."""
    pred_change = binarize_change_prob(pred_prob, threshold)
    correct, total = pck_counts(pred_flow, gt_flow, valid, delta)
    pck_value = _pct(correct, total)
    reports = []
    for r in radii:
        conf = relaxed_confusion(pred_change, gt_change, valid, r)
        report = metrics_from_confusion(conf, delta)
        report.pck = pck_value
        reports.append(report)
    return reports


class CorpusEvaluator:
    """Micro-averaging accumulator: sums confusions, then computes ratios."""

    def __init__(self, radii: tuple[int, ...] = DEFAULT_RADII, delta: float = DEFAULT_DELTA,
                 threshold: float = DEFAULT_THRESHOLD):
        self.radii = tuple(radii)
        self.delta = delta
        self.threshold = threshold
        self._confusions: dict[int, RelaxedConfusion] = {}
        self._pck_correct = 0
        self._pck_total = 0

    def add_sample(
        self,
        pred_prob: np.ndarray,
        pred_flow: np.ndarray,
        gt_change: np.ndarray,
        gt_flow: np.ndarray,
        valid: np.ndarray,
    ) -> list[MetricReport]:
        """Fold one sample in; returns that sample's own reports."""
        pred_change = binarize_change_prob(pred_prob, self.threshold)
        correct, total = pck_counts(pred_flow, gt_flow, valid, self.delta)
        self._pck_correct += correct
        self._pck_total += total
        reports = []
        for r in self.radii:
            conf = relaxed_confusion(pred_change, gt_change, valid, r)
            prev = self._confusions.get(r)
            self._confusions[r] = conf if prev is None else prev + conf
            report = metrics_from_confusion(conf, self.delta)
            report.pck = _pct(correct, total)
            reports.append(report)
        return reports

    def totals(self) -> list[MetricReport]:
        reports = []
        for r in self.radii:
            conf = self._confusions.get(r, RelaxedConfusion(0, 0, 0, 0, 0, r))
            report = metrics_from_confusion(conf, self.delta)
            report.pck = _pct(self._pck_correct, self._pck_total)
            reports.append(report)
        return reports


def format_metric(value: float | None) -> str:
    """Two-decimal fixed formatting; undefined values render as empty."""
    return "" if value is None else f"{value:.2f}"


def write_metrics_csv(path: str | Path, rows: list[tuple[str, MetricReport]]) -> None:
    """CSV with columns sample_id,radius,P,R,F1,IoU,OA,PCK."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["sample_id", "radius", "P", "R", "F1", "IoU", "OA", "PCK"])
        for sample_id, m in rows:
            writer.writerow(
                [
                    sample_id,
                    m.radius,
                    format_metric(m.precision),
                    format_metric(m.recall),
                    format_metric(m.f1),
                    format_metric(m.iou),
                    format_metric(m.oa),
                    format_metric(m.pck),
                ]
            )
