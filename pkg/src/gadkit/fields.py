"""Raster data model and resampling primitives.

Conventions used throughout the library:

- a *scalar field* is a float64 array of shape (H, W),
- a *channel stack* is a float64 array of shape (C, H, W) with C >= 1,
- all values are finite (no NaN/Inf).

Directional differences live on the *edges* of the 4-neighborhood grid
rather than on pixels: every pixel owns its east and south edge, and the
west/north differences are the negations of the neighbor's owned edges.
Edges that would cross the raster border carry exactly 0 (zero-flux
boundary), which makes the explicit diffusion scheme conserve total mass
by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError


def as_scalar_field(data) -> np.ndarray:
    """Validate and convert to a float64 (H, W) array."""
    a = np.asarray(data, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"scalar field must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("scalar field contains non-finite values")
    return a


def as_stack(data) -> np.ndarray:
    """Validate and convert to a float64 (C, H, W) channel stack.

    2-D input is promoted to a single-channel stack.
    """
    a = np.asarray(data, dtype=np.float64)
    if a.ndim == 2:
        a = a[np.newaxis]
    if a.ndim != 3 or a.shape[0] < 1:
        raise ShapeError(f"channel stack must be (C, H, W) with C >= 1, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("channel stack contains non-finite values")
    return a


@dataclass(frozen=True, eq=False)
class EdgeField:
    """Per-edge values on the 4-neighborhood grid.

    ``east[i, j]`` belongs to the edge between (i, j) and (i, j+1);
    ``south[i, j]`` to the edge between (i, j) and (i+1, j).  The last
    column of ``east`` and the last row of ``south`` point outside the
    raster and are always 0.  The same layout is reused for per-edge
    diffusion coefficients, where both incident pixels share the value.
    """

    east: np.ndarray
    south: np.ndarray

    @property
    def shape(self):
        return self.east.shape


def gradient_edges(f) -> EdgeField:
    """Forward differences of a scalar field on the 4-neighborhood edges."""
    a = as_scalar_field(f)
    east = np.zeros_like(a)
    south = np.zeros_like(a)
    east[:, :-1] = a[:, 1:] - a[:, :-1]
    south[:-1, :] = a[1:, :] - a[:-1, :]
    return EdgeField(east=east, south=south)


def edge_divergence(flux: EdgeField) -> np.ndarray:
    """Net inflow per pixel of a per-edge flux field.

    Each edge contributes its value to the pixel that owns it and the
    negation to the neighbor, so the divergence sums to zero over the
    whole raster.
    """
    east, south = flux.east, flux.south
    div = east.copy()
    div[:, 1:] -= east[:, :-1]
    div += south
    div[1:, :] -= south[:-1, :]
    return div


def _axis_samples(n: int, factor: int):
    """Source coordinates for align-corners-false bilinear sampling."""
    pos = (np.arange(n * factor, dtype=np.float64) + 0.5) / factor - 0.5
    pos = np.clip(pos, 0.0, float(n - 1))
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n - 1)
    return lo, hi, pos - lo


def bilinear_upsample(stack, factor: int) -> np.ndarray:
    """Upsample a channel stack by an integer factor.

    Sample centers follow the align-corners-false convention: output pixel
    k maps to source coordinate (k + 0.5)/factor - 0.5, clamped to the
    raster.  Every output is a convex combination of the 4 nearest input
    samples, so global min/max bounds are preserved.
    """
    a = as_stack(stack)
    if factor < 1:
        raise ValueError(f"upsampling factor must be >= 1, got {factor}")
    if factor == 1:
        return a.copy()
    _, h, w = a.shape
    r0, r1, wr = _axis_samples(h, factor)
    c0, c1, wc = _axis_samples(w, factor)
    top = (1.0 - wc) * a[:, r0[:, None], c0[None, :]] + wc * a[:, r0[:, None], c1[None, :]]
    bot = (1.0 - wc) * a[:, r1[:, None], c0[None, :]] + wc * a[:, r1[:, None], c1[None, :]]
    return (1.0 - wr)[:, None] * top + wr[:, None] * bot


def box_downsample(stack, factor: int) -> np.ndarray:
    """Downsample a channel stack by block averaging.

    Dimensions that are not divisible by the factor are first padded by
    replicating the last row/column up to the next multiple.
    """
    a = as_stack(stack)
    if factor < 1:
        raise ValueError(f"downsampling factor must be >= 1, got {factor}")
    if factor == 1:
        return a.copy()
    c, h, w = a.shape
    pad_h = (-h) % factor
    pad_w = (-w) % factor
    if pad_h or pad_w:
        a = np.pad(a, ((0, 0), (0, pad_h), (0, pad_w)), mode="edge")
        h, w = a.shape[1:]
    return a.reshape(c, h // factor, factor, w // factor, factor).mean(axis=(2, 4))
