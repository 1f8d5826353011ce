"""Scene-invariant spatial attention as standalone tensor math.

A learned M x N grid of logits defines per-location weights sigma(a) in
(0, 1).  Features are rescaled so that global average pooling of the
output equals the sigma-weighted average of the input: the normalizer is
M*N / sum(sigma), which makes a freshly initialized grid (all-zero
logits, sigma = 0.5 everywhere) an exact identity.  Forward, analytic
backward, and diffusion-based sharpening of the weights are provided; no
training loop lives here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from .diffusion import GadParams, gad_filter
from .errors import ShapeError
from .fields import as_stack, bilinear_upsample, box_downsample

WEIGHT_CLAMP_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class AttentionGrid:
    """Spatial attention logits; weights are sigma(logits)."""

    logits: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.logits, dtype=np.float64)
        if a.ndim != 2:
            raise ShapeError(f"attention grid must be 2-D, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("attention logits contain non-finite values")
        object.__setattr__(self, "logits", a)

    @classmethod
    def uniform(cls, rows: int, cols: int) -> "AttentionGrid":
        """Fresh grid: zero logits, every weight 0.5."""
        return cls(np.zeros((rows, cols)))

    @property
    def shape(self):
        return self.logits.shape

    def weights(self) -> np.ndarray:
        return expit(self.logits)


def _check_feature_stack(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 3:
        raise ShapeError(f"feature stack must be (C, M, N), got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("feature stack contains non-finite values")
    return a


def forward_with_weights(x: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Reweight features so GAP(output) is the weighted average of x.

    Scaling all weights by a common factor leaves the output unchanged.
    """
    scale = weights.size / weights.sum()
    return scale * x * weights


def attention_forward(x, grid: AttentionGrid) -> np.ndarray:
    """Apply the attention grid to a (C, M, N) feature stack."""
    a = _check_feature_stack(x)
    if a.shape[1:] != grid.shape:
        raise ShapeError(f"grid shape {grid.shape} does not match features {a.shape[1:]}")
    return forward_with_weights(a, grid.weights())


def global_average_pool(x) -> np.ndarray:
    """Spatial mean per channel."""
    return _check_feature_stack(x).mean(axis=(1, 2))


def attention_backward(x, grid: AttentionGrid, upstream):
    """Exact gradients of the forward map w.r.t. features and logits.

    The normalizer depends on every weight, so the logit gradient has a
    local term plus a global correction through sum(sigma).
    """
    a = _check_feature_stack(x)
    g = _check_feature_stack(upstream)
    if a.shape != g.shape:
        raise ShapeError(f"upstream shape {g.shape} does not match features {a.shape}")
    if a.shape[1:] != grid.shape:
        raise ShapeError(f"grid shape {grid.shape} does not match features {a.shape[1:]}")
    w = grid.weights()
    total = w.sum()
    count = w.size
    scale = count / total
    grad_x = g * (scale * w)
    grad_w = scale * (g * a).sum(axis=0) - (count / total**2) * (g * a * w).sum()
    grad_logits = grad_w * w * (1.0 - w)
    return grad_x, grad_logits


def sharpen_attention(grid: AttentionGrid, guides, params: GadParams) -> AttentionGrid:
    """Adapt learned attention weights to the input images.

    The weight grid is bilinearly upsampled to the guide resolution,
    guided-diffused against the images, box-downsampled back, clamped
    away from {0, 1}, and converted back to logits.
    """
    if not guides:
        raise ValueError("at least one guide is required")
    stacks = [as_stack(g) for g in guides]
    h, w = stacks[0].shape[1:]
    rows, cols = grid.shape
    if h % rows or w % cols or h // rows != w // cols:
        raise ShapeError(
            f"guide resolution {(h, w)} is not an integer multiple of the grid {(rows, cols)}"
        )
    factor = h // rows
    up = bilinear_upsample(grid.weights()[np.newaxis], factor)
    filtered = gad_filter(up, stacks, params)
    down = box_downsample(filtered, factor)[0]
    clamped = np.clip(down, WEIGHT_CLAMP_EPS, 1.0 - WEIGHT_CLAMP_EPS)
    return AttentionGrid(logit(clamped))
