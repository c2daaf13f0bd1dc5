"""Proposal quality metrics: ABO/MABO, recall at IoU threshold, average recall.

Ground truth is a list of :class:`GroundTruthAnnotation`.  Proposals may be a
flat list of :class:`Proposal` or a mapping ``image_id -> ranked boxes`` where
boxes are :class:`BoundingBox`, :class:`Proposal` or ``(x0, y0, x1, y1)``.
An annotation whose image has no proposals has best overlap 0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .boxes import BoundingBox, Proposal, open_text, group_by_image
from .exceptions import ConfigurationError, InvalidInputError

__all__ = [
    "RecallCurve",
    "GTStats",
    "EvaluationReport",
    "best_overlaps",
    "abo",
    "mabo",
    "recall_at",
    "recall_curve",
    "average_recall",
    "threshold_grid",
    "evaluate",
    "evaluate_at_budgets",
    "gt_stats",
    "write_report",
    "format_summary",
]

REPORT_HEADER = ["metric", "class", "budget", "threshold", "value"]


@dataclass(frozen=True)
class RecallCurve:
    thresholds: tuple
    recalls: tuple

    def __post_init__(self):
        t = tuple(float(v) for v in self.thresholds)
        r = tuple(float(v) for v in self.recalls)
        if len(t) != len(r) or len(t) < 2:
            raise InvalidInputError("a recall curve needs >= 2 points and equal-length sequences")
        if t[0] != 0.5 or t[-1] != 1.0:
            raise InvalidInputError("recall curve must span [0.5, 1.0]")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise InvalidInputError("thresholds must be strictly ascending")
        if any(not 0.0 <= v <= 1.0 for v in r):
            raise InvalidInputError("recalls must lie in [0, 1]")
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "recalls", r)


class GTStats(NamedTuple):
    avg_width: float
    avg_height: float
    avg_area_ratio: float


@dataclass(frozen=True)
class EvaluationReport:
    per_class_abo: dict
    mabo: float
    recall_curve: RecallCurve
    average_recall: float
    proposal_budget: int | None
    gt_stats: GTStats | None = None
    n_annotations: int = field(default=0)


def _as_box_array(boxes):
    rows = []
    for b in boxes:
        if isinstance(b, Proposal):
            b = b.box
        rows.append(b.as_tuple() if isinstance(b, BoundingBox) else tuple(int(v) for v in b))
    return np.array(rows, dtype=np.int64).reshape(-1, 4)


def _proposal_arrays(proposals):
    if isinstance(proposals, dict):
        out = {}
        for image_id, boxes in proposals.items():
            if isinstance(boxes, np.ndarray):
                out[image_id] = np.asarray(boxes, dtype=np.int64).reshape(-1, 4)
            else:
                boxes = list(boxes)
                if boxes and all(isinstance(b, Proposal) for b in boxes):
                    boxes.sort(key=lambda p: p.rank)
                out[image_id] = _as_box_array(boxes)
        return out
    return {k: _as_box_array(v) for k, v in group_by_image(proposals).items()}


def _iou_matrix(gt, props):
    """IoU of every gt row (m, 4) against every proposal row (n, 4)."""
    ix = np.minimum(gt[:, None, 2], props[None, :, 2]) - np.maximum(gt[:, None, 0], props[None, :, 0])
    iy = np.minimum(gt[:, None, 3], props[None, :, 3]) - np.maximum(gt[:, None, 1], props[None, :, 1])
    inter = np.clip(ix, 0, None) * np.clip(iy, 0, None)
    area_g = (gt[:, 2] - gt[:, 0]) * (gt[:, 3] - gt[:, 1])
    area_p = (props[:, 2] - props[:, 0]) * (props[:, 3] - props[:, 1])
    union = area_g[:, None] + area_p[None, :] - inter
    return inter / union


def _best_overlap_table(gts, proposals, budgets):
    """Best IoU per annotation for each budget; shape ``(len(budgets), len(gts))``.

    A budget of ``None`` means no truncation.
    """
    arrays = _proposal_arrays(proposals)
    table = np.zeros((len(budgets), len(gts)), dtype=np.float64)
    by_image = {}
    for i, g in enumerate(gts):
        by_image.setdefault(g.image_id, []).append(i)
    for image_id, idx in by_image.items():
        props = arrays.get(image_id)
        if props is None or len(props) == 0:
            continue
        gt = np.array([gts[i].box.as_tuple() for i in idx], dtype=np.int64)
        running = np.maximum.accumulate(_iou_matrix(gt, props), axis=1)
        n = props.shape[0]
        for b, budget in enumerate(budgets):
            k = n if budget is None else min(int(budget), n)
            if k > 0:
                table[b, idx] = running[:, k - 1]
    return table


def best_overlaps(gts, proposals):
    """Best IoU of each annotation against its image's proposals."""
    return _best_overlap_table(list(gts), proposals, [None])[0]


def _per_class_abo(gts, best):
    groups = {}
    for g, v in zip(gts, best):
        groups.setdefault(g.class_label, []).append(v)
    return {c: float(np.mean(vs)) for c, vs in groups.items()}


def abo(gts_of_class, proposals):
    """Average best overlap of one class's annotations."""
    gts_of_class = list(gts_of_class)
    if not gts_of_class:
        raise InvalidInputError("ABO is undefined for a class without annotations")
    return float(np.mean(best_overlaps(gts_of_class, proposals)))


def mabo(gts, proposals):
    """Unweighted mean of per-class ABO over the classes present in ``gts``."""
    gts = list(gts)
    if not gts:
        raise InvalidInputError("MABO is undefined without annotations")
    per_class = _per_class_abo(gts, best_overlaps(gts, proposals))
    return float(np.mean(list(per_class.values())))


def _check_threshold(t):
    if not 0.5 <= t <= 1.0:
        raise InvalidInputError(f"IoU threshold must lie in [0.5, 1], got {t}")
    return float(t)


def recall_at(t, gts, proposals):
    """Fraction of all annotations (classes pooled) with best IoU >= ``t``."""
    t = _check_threshold(t)
    gts = list(gts)
    if not gts:
        raise InvalidInputError("recall is undefined without annotations")
    return float(np.mean(best_overlaps(gts, proposals) >= t))


def threshold_grid(step=0.01):
    """``0.5, 0.5 + step, ..., 1.0``; ``step`` must divide 0.5."""
    if not 0 < step <= 0.5:
        raise InvalidInputError(f"step must lie in (0, 0.5], got {step}")
    n = int(round(0.5 / step))
    if abs(n * step - 0.5) > 1e-9:
        raise InvalidInputError(f"step {step} does not divide the interval [0.5, 1]")
    # rounding makes grid points the nearest floats to their decimal values
    return np.round(0.5 + 0.5 * np.arange(n + 1) / n, 12)


def _curve_from_best(best, grid):
    if len(best) == 0:
        raise InvalidInputError("recall is undefined without annotations")
    recalls = [float(np.mean(best >= t)) for t in grid]
    return RecallCurve(tuple(grid), tuple(recalls))


def recall_curve(gts, proposals, step=0.01):
    gts = list(gts)
    return _curve_from_best(best_overlaps(gts, proposals), threshold_grid(step))


def average_recall(curve):
    """Trapezoidal area under the recall curve over [0.5, 1]."""
    t, r = curve.thresholds, curve.recalls
    # differences of points in [0.5, 1] are exact, so fsum telescopes exactly
    return math.fsum((t[i + 1] - t[i]) * (r[i + 1] + r[i]) / 2.0 for i in range(len(t) - 1))


def gt_stats(gts, image_sizes):
    """Mean box width, height and box/image area ratio over all annotations."""
    gts = list(gts)
    if not gts:
        raise InvalidInputError("statistics are undefined without annotations")
    missing = sorted({g.image_id for g in gts if g.image_id not in image_sizes})
    if missing:
        raise ConfigurationError(f"no image size known for {missing[:5]}{'...' if len(missing) > 5 else ''}")
    widths = np.array([g.box.width for g in gts], dtype=np.float64)
    heights = np.array([g.box.height for g in gts], dtype=np.float64)
    img_area = np.array([image_sizes[g.image_id][0] * image_sizes[g.image_id][1] for g in gts], dtype=np.float64)
    return GTStats(float(widths.mean()), float(heights.mean()), float(np.mean(widths * heights / img_area)))


def _report(gts, best, grid, budget, stats):
    per_class = _per_class_abo(gts, best)
    curve = _curve_from_best(best, grid)
    return EvaluationReport(
        per_class_abo=per_class,
        mabo=float(np.mean(list(per_class.values()))),
        recall_curve=curve,
        average_recall=average_recall(curve),
        proposal_budget=budget,
        gt_stats=stats,
        n_annotations=len(gts),
    )


def evaluate_at_budgets(gts, proposals, budgets, image_sizes=None, step=0.01):
    """Full report for every budget, truncating each image's ranked list to its top ``k``."""
    gts = list(gts)
    if not gts:
        raise InvalidInputError("evaluation is undefined without annotations")
    budgets = [int(b) for b in budgets]
    if any(b < 0 for b in budgets):
        raise InvalidInputError(f"budgets must be non-negative, got {budgets}")
    grid = threshold_grid(step)
    stats = gt_stats(gts, image_sizes) if image_sizes is not None else None
    table = _best_overlap_table(gts, proposals, budgets)
    return [(b, _report(gts, table[i], grid, b, stats)) for i, b in enumerate(budgets)]


def evaluate(gts, proposals, budget=None, image_sizes=None, step=0.01):
    """Single report; ``budget=None`` evaluates the untruncated lists."""
    gts = list(gts)
    if not gts:
        raise InvalidInputError("evaluation is undefined without annotations")
    grid = threshold_grid(step)
    stats = gt_stats(gts, image_sizes) if image_sizes is not None else None
    best = _best_overlap_table(gts, proposals, [budget])[0]
    return _report(gts, best, grid, budget, stats)


def _fmt(v):
    return repr(float(v))


def write_report(reports, file):
    """Emit ``metric,class,budget,threshold,value`` rows for ``[(budget, report), ...]``."""
    with open_text(file, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for budget, rep in reports:
            b = "" if budget is None else str(budget)
            for cls, v in sorted(rep.per_class_abo.items()):
                w.writerow(["abo", cls, b, "", _fmt(v)])
            w.writerow(["mabo", "ALL", b, "", _fmt(rep.mabo)])
            for t, r in zip(rep.recall_curve.thresholds, rep.recall_curve.recalls):
                w.writerow(["recall", "ALL", b, f"{t:.4f}", _fmt(r)])
            w.writerow(["ar", "ALL", b, "", _fmt(rep.average_recall)])
            if rep.gt_stats is not None:
                for name, v in rep.gt_stats._asdict().items():
                    w.writerow([name, "ALL", b, "", _fmt(v)])


def format_summary(reports):
    """Plain-text table of MABO, recall at 0.5/0.7/0.9 and AR per budget."""
    lines = [f"{'budget':>8}  {'MABO':>7}  {'R@0.5':>7}  {'R@0.7':>7}  {'R@0.9':>7}  {'AR':>7}"]
    for budget, rep in reports:
        curve = dict(zip((round(t, 6) for t in rep.recall_curve.thresholds), rep.recall_curve.recalls))

        def at(t):
            v = curve.get(t)
            return "    n/a" if v is None else f"{v:7.4f}"

        label = "all" if budget is None else str(budget)
        lines.append(f"{label:>8}  {rep.mabo:7.4f}  {at(0.5)}  {at(0.7)}  {at(0.9)}  {rep.average_recall:7.4f}")
    if reports and reports[0][1].gt_stats is not None:
        s = reports[0][1].gt_stats
        lines.append(f"gt: avg width {s.avg_width:.2f} px, avg height {s.avg_height:.2f} px, "
                     f"avg area ratio {s.avg_area_ratio:.4f}")
    return "\n".join(lines)
