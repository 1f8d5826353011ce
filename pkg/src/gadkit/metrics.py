"""Confusion tallies, Dice/accuracy, and boundary-restricted evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter, minimum_filter

from .errors import ShapeError, UndefinedMetricError
from .labels import LabelMap


@dataclass(frozen=True)
class ConfusionCounts:
    """One-vs-rest TP/FP/FN/TN per class over the evaluated pixels.

    ``per_class`` maps class id -> (tp, fp, fn, tn); each tally sums to
    ``evaluated_pixels``.  ``correct_pixels`` counts exact label matches
    and feeds global accuracy.
    """

    per_class: dict[int, tuple[int, int, int, int]]
    evaluated_pixels: int
    correct_pixels: int


def confusion(pred: LabelMap, truth: LabelMap, eval_mask: LabelMap | None = None) -> ConfusionCounts:
    """Tally one-vs-rest confusion counts per class.

    Pixels labeled ignore in the truth are excluded; an eval mask (1 =
    evaluate) restricts the set further.
    """
    if pred.shape != truth.shape:
        raise ShapeError(f"prediction shape {pred.shape} does not match truth {truth.shape}")
    evaluated = truth.ids != truth.ignore_id
    if eval_mask is not None:
        if eval_mask.shape != truth.shape:
            raise ShapeError(
                f"eval mask shape {eval_mask.shape} does not match truth {truth.shape}"
            )
        evaluated &= eval_mask.ids == 1
    p = pred.ids[evaluated]
    t = truth.ids[evaluated]
    n = int(evaluated.sum())
    per_class = {}
    for c in range(truth.num_classes):
        tp = int(((p == c) & (t == c)).sum())
        fp = int(((p == c) & (t != c)).sum())
        fn = int(((p != c) & (t == c)).sum())
        per_class[c] = (tp, fp, fn, n - tp - fp - fn)
    return ConfusionCounts(per_class=per_class, evaluated_pixels=n, correct_pixels=int((p == t).sum()))


def dice(counts: ConfusionCounts, class_id: int) -> float:
    """Sorensen-Dice coefficient 2TP / (2TP + FP + FN) for one class."""
    if counts.evaluated_pixels == 0:
        raise UndefinedMetricError("empty evaluation set")
    tp, fp, fn, _ = counts.per_class[class_id]
    denom = 2 * tp + fp + fn
    if denom == 0:
        raise UndefinedMetricError(f"class {class_id} absent from prediction and truth")
    return 2 * tp / denom


def global_accuracy(counts: ConfusionCounts) -> float:
    """Fraction of evaluated pixels classified correctly."""
    if counts.evaluated_pixels == 0:
        raise UndefinedMetricError("empty evaluation set")
    return counts.correct_pixels / counts.evaluated_pixels


def boundary_mask(truth: LabelMap, radius: int) -> LabelMap:
    """Binary mask of pixels within Chebyshev distance ``radius`` of a
    class boundary in the truth map.

    Equivalent to the complement of eroding each class region by a
    (2r+1)-square structuring element.
    """
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    size = 2 * radius + 1
    hi = maximum_filter(truth.ids, size=size, mode="nearest")
    lo = minimum_filter(truth.ids, size=size, mode="nearest")
    return LabelMap((hi != lo).astype(np.uint8), num_classes=2, ignore_id=truth.ignore_id if truth.ignore_id >= 2 else 2)
