"""Baseline up-samplers and definition re-masking.

Nearest neighbor preserves sharp structured-light edges and is the
pre-expansion used for model inputs; bicubic is the ToF-style comparison
baseline and requires a hole-free input.
"""

from __future__ import annotations

import numpy as np

from .core import DefinitionMap, DepthMap


def upsample_nn(depth: DepthMap, s: int) -> DepthMap:
    """Replicate every pixel into an s x s block (undefined stays undefined)."""
    if s < 1:
        raise ValueError("upsample factor must be >= 1")
    if s == 1:
        return DepthMap(depth.data.copy())
    data = np.repeat(np.repeat(depth.data, s, axis=0), s, axis=1)
    return DepthMap(data)


def _cubic_weights(frac: np.ndarray) -> np.ndarray:
    """Catmull-Rom (a = -0.5) weights for the 4-tap stencil at offsets
    -1..2 around the sample position."""
    a = -0.5
    x = np.stack([frac + 1.0, frac, 1.0 - frac, 2.0 - frac])
    ax = np.abs(x)
    w = np.where(
        ax <= 1.0,
        (a + 2.0) * ax**3 - (a + 3.0) * ax**2 + 1.0,
        a * ax**3 - 5.0 * a * ax**2 + 8.0 * a * ax - 4.0 * a,
    )
    return w


def _cubic_axis(data: np.ndarray, s: int, axis: int) -> np.ndarray:
    n = data.shape[axis]
    # Center-aligned mapping: output pixel i samples (i + 0.5) / s - 0.5.
    coords = (np.arange(n * s) + 0.5) / s - 0.5
    base = np.floor(coords).astype(np.int64)
    frac = coords - base
    weights = _cubic_weights(frac)
    out = np.zeros(
        data.shape[:axis] + (n * s,) + data.shape[axis + 1:], dtype=np.float64
    )
    for tap in range(4):
        idx = np.clip(base - 1 + tap, 0, n - 1)
        picked = np.take(data, idx, axis=axis)
        shape = [1] * data.ndim
        shape[axis] = n * s
        out += picked * weights[tap].reshape(shape)
    return out


def upsample_bicubic(depth: DepthMap, s: int) -> DepthMap:
    """Separable Catmull-Rom bicubic with clamp-to-edge boundaries."""
    if s < 1:
        raise ValueError("upsample factor must be >= 1")
    if not np.isfinite(depth.data).all():
        raise ValueError("bicubic upsampling requires a fully defined map")
    if s == 1:
        return DepthMap(depth.data.copy())
    data = depth.data.astype(np.float64)
    data = _cubic_axis(data, s, axis=0)
    data = _cubic_axis(data, s, axis=1)
    return DepthMap(data.astype(np.float32))


def remask(depth: DepthMap, definition: DefinitionMap) -> DepthMap:
    """Set pixels back to undefined wherever the definition map is 0."""
    if depth.shape != definition.shape:
        raise ValueError(
            f"definition shape {definition.shape} != depth shape {depth.shape}"
        )
    out = np.where(definition.as_bool(), depth.data, np.float32(np.nan))
    return DepthMap(out)
