"""Boundary restoration for upsampled segmentation probabilities.

A segmenter run on downsampled imagery produces per-class softmax maps
at a coarse resolution.  The pipeline upsamples them back to the guide
resolution, applies guided diffusion with the high-resolution image as
the guide to snap region boundaries to real image edges, and takes a
per-pixel argmax.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diffusion import GadParams, gad_filter
from .errors import ShapeError
from .fields import as_stack, bilinear_upsample, box_downsample
from .labels import LabelMap

SOFTMAX_SUM_TOL = 1e-5


@dataclass(frozen=True)
class RefinePipelineConfig:
    """Subsampling factor plus diffusion parameters.

    Argmax ties always break toward the lowest class id.
    """

    scale: int = 1
    gad: GadParams = field(default_factory=GadParams)

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError(f"subsampling factor must be >= 1, got {self.scale}")


def _check_softmax(stack: np.ndarray, name: str) -> None:
    sums = stack.sum(axis=0)
    err = np.abs(sums - 1.0).max()
    if err > SOFTMAX_SUM_TOL:
        raise ValueError(
            f"{name} must sum to 1 per pixel (max deviation {err:.3g})"
        )


def refine_upsampled(probs_low, guide_high, config: RefinePipelineConfig):
    """Upsample class probabilities, guided-diffuse, and argmax.

    Returns the refined high-resolution probabilities (renormalized per
    pixel against float drift) and the label map.
    """
    probs = as_stack(probs_low)
    guide = as_stack(guide_high)
    ss = config.scale
    expected = (probs.shape[1] * ss, probs.shape[2] * ss)
    if guide.shape[1:] != expected:
        raise ShapeError(
            f"guide dimensions {guide.shape[1:]} do not match probabilities "
            f"{probs.shape[1:]} at subsampling factor {ss}"
        )
    _check_softmax(probs, "class probabilities")
    high = bilinear_upsample(probs, ss)
    if config.gad.iterations > 0:
        high = gad_filter(high, [guide], config.gad)
    high /= high.sum(axis=0, keepdims=True)
    num_classes = high.shape[0]
    labels = LabelMap(
        np.argmax(high, axis=0).astype(np.uint8),
        num_classes=num_classes,
        ignore_id=max(num_classes, 2),
    )
    return high, labels


def simulate_low_res(truth_onehot, factor: int) -> np.ndarray:
    """Synthetic stand-in for a segmenter run at a coarser resolution.

    Box-downsamples a one-hot truth stack and renormalizes per pixel,
    yielding plausible soft predictions with blurred boundaries.
    """
    stack = as_stack(truth_onehot)
    _check_softmax(stack, "one-hot truth")
    low = box_downsample(stack, factor)
    return low / low.sum(axis=0, keepdims=True)
