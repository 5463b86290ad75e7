"""Dataset preparation: gradient-aware downsampling, hole filling, texture
augmentation.

Undefined regions come in two kinds. Holes touching the raster border are
background and get a constant fill value; interior holes sit near the
object (shadows, gloss) and are filled row-wise from the defined pixels
bordering each run. Filled values are intentionally approximate: they are
masked back out after upsampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import DefinitionMap, DepthMap, IntensityMap, definition_map

_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCTURE_8 = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class HoleLabeling:
    """Connected components of undefined pixels.

    labels is 0 on defined pixels and k in 1..hole_count on the k-th hole;
    background_ids holds the components that touch the raster border.
    """

    labels: np.ndarray
    background_ids: frozenset
    hole_count: int

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int32)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "background_ids", frozenset(self.background_ids))

    def background_mask(self) -> np.ndarray:
        if not self.background_ids:
            return np.zeros_like(self.labels, dtype=bool)
        ids = np.fromiter(self.background_ids, dtype=np.int32)
        return np.isin(self.labels, ids)

    def near_object_mask(self) -> np.ndarray:
        return (self.labels > 0) & ~self.background_mask()


@dataclass(frozen=True)
class FillConfig:
    """Fill constants: b for background holes, its intensity analog, and the
    hole connectivity."""

    background_value_depth: float
    background_value_intensity: float = 1.0
    connectivity: int = 4

    def __post_init__(self) -> None:
        if not self.background_value_depth > 0:
            raise ValueError("background_value_depth must be positive")
        if not 0.0 <= self.background_value_intensity <= 1.0:
            raise ValueError("background_value_intensity must lie in [0, 1]")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")


def downsample(depth: DepthMap, s: int, tau: float = 5.0) -> DepthMap:
    """Collapse each s x s block to one pixel, preserving foreground edges.

    Within a block, over its defined pixels: if max - min <= tau the block
    is smooth and the pixel nearest the block center wins (ties: smallest
    row-major index); otherwise the block straddles a depth edge and the
    minimum (nearest to camera) wins. Blocks with no defined pixel map to
    an undefined pixel. Output values are always members of their block.
    """
    if s < 1:
        raise ValueError("downsample factor must be >= 1")
    h, w = depth.shape
    if h % s or w % s:
        raise ValueError(f"factor {s} does not divide {w}x{h}")
    if s == 1:
        return DepthMap(depth.data.copy())
    oh, ow = h // s, w // s
    blocks = (
        depth.data.reshape(oh, s, ow, s).transpose(0, 2, 1, 3).reshape(oh, ow, s * s)
    )
    defined = np.isfinite(blocks)
    any_defined = defined.any(axis=2)
    lo = np.min(np.where(defined, blocks, np.float32(np.inf)), axis=2)
    hi = np.max(np.where(defined, blocks, np.float32(-np.inf)), axis=2)

    # Defined pixel nearest the block center; ties by row-major index.
    center = (s - 1) / 2.0
    rr, cc = np.divmod(np.arange(s * s), s)
    dist2 = (rr - center) ** 2 + (cc - center) ** 2
    order = np.lexsort((np.arange(s * s), dist2))
    central = np.full((oh, ow), np.nan, dtype=np.float32)
    for idx in order:
        need = np.isnan(central) & defined[:, :, idx]
        central[need] = blocks[:, :, idx][need]

    out = np.where(hi - lo <= tau, central, lo).astype(np.float32)
    out[~any_defined] = np.nan
    return DepthMap(out)


def classify_holes(definition: DefinitionMap, connectivity: int = 4) -> HoleLabeling:
    """Label maximal connected undefined regions and flag the ones touching
    the raster border as background."""
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    holes = definition.data == 0
    structure = _STRUCTURE_4 if connectivity == 4 else _STRUCTURE_8
    labels, count = ndimage.label(holes, structure=structure)
    border = np.concatenate(
        [labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]]
    )
    background = frozenset(int(v) for v in np.unique(border) if v > 0)
    return HoleLabeling(
        labels=labels.astype(np.int32), background_ids=background, hole_count=count
    )


def _check_labeling(labeling: HoleLabeling, defined: np.ndarray, what: str) -> None:
    if labeling.labels.shape != defined.shape:
        raise ValueError(
            f"labeling shape {labeling.labels.shape} != {what} shape {defined.shape}"
        )
    if ((labeling.labels > 0) != ~defined).any():
        raise ValueError(f"labeling does not match the undefined set of {what}")


def _row_fill(
    values: np.ndarray,
    defined: np.ndarray,
    labeling: HoleLabeling,
    background_value: float,
) -> np.ndarray:
    """Shared fill: background holes get the constant, near-object holes are
    filled per maximal horizontal run with the max of the originally-defined
    pixels immediately left and right of the run."""
    h, w = values.shape
    out = values.astype(np.float64, copy=True)

    bg = labeling.background_mask()
    out[bg] = background_value

    near = labeling.near_object_mask()
    if near.any():
        cols = np.broadcast_to(np.arange(w), (h, w))
        left_idx = np.where(defined, cols, -1)
        np.maximum.accumulate(left_idx, axis=1, out=left_idx)
        right_idx = np.where(defined, cols, w)
        right_idx = np.flip(
            np.minimum.accumulate(np.flip(right_idx, axis=1), axis=1), axis=1
        )
        rows = np.broadcast_to(np.arange(h)[:, None], (h, w))
        left_val = np.where(
            left_idx >= 0, values[rows, np.clip(left_idx, 0, w - 1)], np.nan
        )
        right_val = np.where(
            right_idx < w, values[rows, np.clip(right_idx, 0, w - 1)], np.nan
        )
        # fmax ignores a NaN side; both sides NaN cannot happen for a
        # correctly classified near-object hole.
        fill = np.fmax(left_val, right_val)
        if np.isnan(fill[near]).any():
            raise AssertionError(
                "near-object hole run without defined border pixels; "
                "labeling is inconsistent with its definition map"
            )
        out[near] = fill[near]
    return out


def fill_depth(
    depth: DepthMap, labeling: HoleLabeling, config: FillConfig
) -> DepthMap:
    """Fill every undefined pixel; originally defined pixels pass through
    bit-exact."""
    defined = np.isfinite(depth.data)
    _check_labeling(labeling, defined, "depth")
    filled = _row_fill(
        depth.data, defined, labeling, config.background_value_depth
    )
    out = np.where(defined, depth.data, filled.astype(np.float32))
    return DepthMap(out)


def augment_texture(
    intensity: IntensityMap,
    definition: DefinitionMap,
    labeling: HoleLabeling,
    config: FillConfig,
) -> IntensityMap:
    """Zero intensity pixels that are undefined in the depth map, then refill
    them with the depth-fill procedure so texture and depth stay correlated."""
    if intensity.shape != definition.shape:
        raise ValueError(
            f"intensity shape {intensity.shape} != definition {definition.shape}"
        )
    defined = definition.as_bool()
    _check_labeling(labeling, defined, "definition")
    filled = _row_fill(
        intensity.data, defined, labeling, config.background_value_intensity
    )
    out = np.where(defined, intensity.data, filled.astype(np.float32))
    return IntensityMap(out)


def labeling_for(depth: DepthMap, connectivity: int = 4) -> HoleLabeling:
    """Convenience: classify holes straight from a depth map."""
    return classify_holes(definition_map(depth), connectivity)
