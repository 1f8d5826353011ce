"""Seeded synthetic scenarios for desk-scale testing and the CLI.

Two families:

- square: a bright square on a dark background with a deliberately
  oversized (dilated) change mask, standing in for parcel-style label
  noise around region boundaries.
- disk: a sharp disk with a one-hot truth stack, standing in for a
  segmentation target whose low-resolution predictions need boundary
  restoration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_dilation

from .labels import LabelMap

# Mild guide noise; well below the square scenario's contrast scale so
# it does not create spurious diffusion barriers.
SQUARE_GUIDE_NOISE = 0.01
SQUARE_CONTRAST = 0.05


@dataclass(frozen=True)
class LabelNoiseScenario:
    """Guide image, true mask, and an oversized noisy mask."""

    guide: np.ndarray  # (1, H, W)
    truth: LabelMap
    noisy: LabelMap

    @property
    def noisy_prob(self) -> np.ndarray:
        """The noisy mask as a change-probability field."""
        return self.noisy.ids.astype(np.float64)


@dataclass(frozen=True)
class SegmentationScenario:
    """Guide image and a one-hot truth stack (background, object)."""

    guide: np.ndarray  # (1, H, W)
    truth: LabelMap
    onehot: np.ndarray  # (2, H, W)


def square_scenario(
    seed: int = 0,
    size: int = 64,
    square: int = 24,
    dilation: int = 6,
    noise: float = SQUARE_GUIDE_NOISE,
) -> LabelNoiseScenario:
    """Bright centered square with its change mask dilated outward.

    The dilation uses the 8-connected structuring element, so the noisy
    mask extends the square by ``dilation`` pixels in Chebyshev distance.
    """
    rng = np.random.default_rng(seed)
    mask = np.zeros((size, size), dtype=bool)
    start = (size - square) // 2
    mask[start : start + square, start : start + square] = True
    guide = mask.astype(np.float64)
    if noise:
        guide = np.clip(guide + rng.normal(0.0, noise, guide.shape), 0.0, 1.0)
    noisy = binary_dilation(mask, structure=np.ones((3, 3), dtype=bool), iterations=dilation)
    return LabelNoiseScenario(
        guide=guide[np.newaxis],
        truth=LabelMap(mask.astype(np.uint8), num_classes=2),
        noisy=LabelMap(noisy.astype(np.uint8), num_classes=2),
    )


def disk_scenario(seed: int = 0, size: int = 128, radius: int = 40) -> SegmentationScenario:
    """Sharp centered disk (center jittered by the seed) with one-hot truth."""
    rng = np.random.default_rng(seed)
    jitter = rng.integers(-2, 3, size=2)
    cy, cx = size / 2 + jitter[0], size / 2 + jitter[1]
    yy, xx = np.mgrid[0:size, 0:size]
    mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius**2
    onehot = np.stack([(~mask).astype(np.float64), mask.astype(np.float64)])
    return SegmentationScenario(
        guide=mask.astype(np.float64)[np.newaxis],
        truth=LabelMap(mask.astype(np.uint8), num_classes=2),
        onehot=onehot,
    )
