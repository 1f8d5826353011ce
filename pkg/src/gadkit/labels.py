"""Label-map model and the data-cleansing side of iterative training.

Covers binarization of change probabilities, the three strategies for
merging original labels with filtered predictions, and inverse-frequency
class weights with a zero-weighted ignore class.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .diffusion import GadParams, gad_filter
from .errors import MissingClassError, ShapeError
from .fields import as_scalar_field

DEFAULT_IGNORE_ID = 2


@dataclass(frozen=True, eq=False)
class LabelMap:
    """H x W grid of small-integer class ids with a reserved ignore id."""

    ids: np.ndarray
    num_classes: int = 2
    ignore_id: int = DEFAULT_IGNORE_ID

    def __post_init__(self):
        ids = np.asarray(self.ids)
        if ids.ndim != 2:
            raise ShapeError(f"label map must be 2-D, got shape {ids.shape}")
        if not np.issubdtype(ids.dtype, np.integer):
            ids = ids.astype(np.int64)
        object.__setattr__(self, "ids", ids)
        if self.num_classes < 1:
            raise ValueError(f"need at least one class, got {self.num_classes}")
        if self.ignore_id < self.num_classes:
            raise ValueError(
                f"ignore id {self.ignore_id} collides with semantic ids 0..{self.num_classes - 1}"
            )
        valid = (ids >= 0) & ((ids < self.num_classes) | (ids == self.ignore_id))
        if not valid.all():
            bad = np.unique(ids[~valid])
            raise ValueError(f"label map contains out-of-range ids {bad.tolist()}")

    @property
    def shape(self):
        return self.ids.shape


class MergeStrategy(Enum):
    """How to resolve pixels where original labels and predictions disagree."""

    INTERSECTION = "intersection"
    IGNORE_FALSE_NEGATIVES = "ignore-fn"
    IGNORE_ALL_DISAGREEMENTS = "ignore-all"


def binarize(prob, threshold: float = 0.5, ignore_id: int = DEFAULT_IGNORE_ID) -> LabelMap:
    """Threshold a probability field into a binary label map.

    Ties go to class 0 (strict greater-than), so the result is
    deterministic at the threshold.
    """
    a = as_scalar_field(prob)
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    if a.min() < -1e-6 or a.max() > 1.0 + 1e-6:
        raise ValueError(
            f"probabilities must lie in [0, 1]; got range [{a.min()}, {a.max()}]"
        )
    return LabelMap((a > threshold).astype(np.uint8), num_classes=2, ignore_id=ignore_id)


def _require_binary(m: LabelMap, name: str) -> np.ndarray:
    ids = m.ids
    if not np.isin(ids, (0, 1)).all():
        raise ValueError(f"{name} must be binary {{0, 1}}")
    return ids


def merge(original: LabelMap, prediction: LabelMap, strategy: MergeStrategy) -> LabelMap:
    """Merge original binary labels with a binary prediction.

    Agreeing pixels are always kept.  Disagreements are resolved per
    strategy:

    - INTERSECTION: output 1 only where both are 1; disagreements go to 0.
    - IGNORE_FALSE_NEGATIVES: (pred 0, orig 1) becomes ignore;
      (pred 1, orig 0) becomes 0.
    - IGNORE_ALL_DISAGREEMENTS: every disagreement becomes ignore.
    """
    o = _require_binary(original, "original labels")
    p = _require_binary(prediction, "prediction")
    if o.shape != p.shape:
        raise ShapeError(f"label shapes disagree: {o.shape} vs {p.shape}")
    strategy = MergeStrategy(strategy)
    out = o.astype(np.uint8).copy()
    false_neg = (p == 0) & (o == 1)
    false_pos = (p == 1) & (o == 0)
    if strategy is MergeStrategy.INTERSECTION:
        out[false_neg] = 0
        out[false_pos] = 0
    elif strategy is MergeStrategy.IGNORE_FALSE_NEGATIVES:
        out[false_neg] = original.ignore_id
        out[false_pos] = 0
    else:
        out[false_neg] = original.ignore_id
        out[false_pos] = original.ignore_id
    return LabelMap(out, num_classes=2, ignore_id=original.ignore_id)


def class_weights(maps) -> dict[int, float]:
    """Inverse-frequency class weights over one or more label maps.

    weight_c = total_non_ignore / (num_classes * count_c); the ignore
    class gets weight 0.  Balanced classes therefore all get weight 1,
    and sum_c weight_c * count_c equals the number of counted pixels.
    """
    maps = list(maps)
    if not maps:
        raise ValueError("at least one label map is required")
    num_classes = maps[0].num_classes
    ignore_id = maps[0].ignore_id
    counts = np.zeros(num_classes, dtype=np.int64)
    for m in maps:
        if m.num_classes != num_classes or m.ignore_id != ignore_id:
            raise ValueError("all label maps must share num_classes and ignore_id")
        ids = m.ids[m.ids != ignore_id]
        counts += np.bincount(ids.ravel(), minlength=num_classes)[:num_classes]
    if (counts == 0).any():
        raise MissingClassError(np.flatnonzero(counts == 0).tolist())
    total = int(counts.sum())
    weights = {c: total / (num_classes * int(counts[c])) for c in range(num_classes)}
    weights[ignore_id] = 0.0
    return weights


def cleanse(
    original: LabelMap,
    prob,
    guides,
    params: GadParams,
    strategy: MergeStrategy,
    threshold: float = 0.5,
    kernel: str = "optimized",
) -> LabelMap:
    """One hyperepoch's label-cleansing step.

    The change-probability field is filtered by guided diffusion against
    the image guides, thresholded, and merged with the *original* ground
    truth (never a previously merged map, which degrades over
    hyperepochs).
    """
    a = as_scalar_field(prob)
    if a.shape != original.shape:
        raise ShapeError(
            f"probability shape {a.shape} does not match labels {original.shape}"
        )
    filtered = gad_filter(a[np.newaxis], guides, params, kernel=kernel)[0]
    prediction = binarize(filtered, threshold, ignore_id=original.ignore_id)
    return merge(original, prediction, strategy)
