"""Domain types for the depth-map pipeline.

All rasters are row-major 2D numpy arrays. Depth is stored as float32
millimeters with NaN as the undefined-pixel sentinel; on disk undefined
pixels are serialized as 0.0 (see depthsr.io). Every container is frozen
and its array payload is made read-only, so instances are safe to share
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

UNDEFINED = np.float32(np.nan)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _require_2d(data: np.ndarray, what: str) -> None:
    if data.ndim != 2:
        raise ValueError(
            f"{what} data must be a 2D row-major grid, got shape {data.shape}"
        )
    if data.shape[0] < 1 or data.shape[1] < 1:
        raise ValueError(f"{what} must be at least 1x1, got shape {data.shape}")


@dataclass(frozen=True)
class DepthMap:
    """Dense depth raster in millimeters; NaN marks undefined pixels."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float32)
        _require_2d(data, "DepthMap")
        finite = np.isfinite(data)
        bad = ~finite & ~np.isnan(data)
        if bad.any():
            raise ValueError("DepthMap contains infinite values")
        if (data[finite] <= 0).any():
            raise ValueError("DepthMap contains non-positive depth values")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def defined_mask(self) -> np.ndarray:
        return np.isfinite(self.data)


@dataclass(frozen=True)
class IntensityMap:
    """Grayscale texture raster, values normalized to [0, 1]."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float32)
        _require_2d(data, "IntensityMap")
        if not np.isfinite(data).all():
            raise ValueError("IntensityMap contains non-finite values")
        if (data < 0).any() or (data > 1).any():
            raise ValueError("IntensityMap values must lie in [0, 1]")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True)
class DefinitionMap:
    """Binary raster: 1 where the paired depth pixel was originally defined."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.uint8)
        _require_2d(data, "DefinitionMap")
        if not np.isin(data, (0, 1)).all():
            raise ValueError("DefinitionMap values must be 0 or 1")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def as_bool(self) -> np.ndarray:
        return self.data.astype(bool)


@dataclass(frozen=True)
class ObjectMap:
    """Binary raster: 1 where the pixel belongs to the scanned object."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.uint8)
        _require_2d(data, "ObjectMap")
        if not np.isin(data, (0, 1)).all():
            raise ValueError("ObjectMap values must be 0 or 1")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def as_bool(self) -> np.ndarray:
        return self.data.astype(bool)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixel units."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self) -> None:
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if self.cx < 0 or self.cy < 0:
            raise ValueError("principal point must be non-negative")

    def validate_for(self, width: int, height: int) -> None:
        """Check the principal point falls inside a width x height raster."""
        if not (0 <= self.cx < width and 0 <= self.cy < height):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside raster "
                f"{width}x{height}"
            )


@dataclass(frozen=True)
class Sample:
    """One scene: HR rasters, optional LR depth, intrinsics and metadata."""

    hr_depth: DepthMap
    intensity: IntensityMap
    definition: DefinitionMap
    intrinsics: CameraIntrinsics
    scale: int = 1
    object_map: Optional[ObjectMap] = None
    lr_depth: Optional[DepthMap] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        shape = self.hr_depth.shape
        for name, raster in (
            ("intensity", self.intensity),
            ("definition", self.definition),
            ("object_map", self.object_map),
        ):
            if raster is not None and raster.shape != shape:
                raise ValueError(
                    f"{name} shape {raster.shape} does not match HR depth {shape}"
                )
        if not (isinstance(self.scale, int) and self.scale >= 1):
            raise ValueError(f"scale must be a positive integer, got {self.scale}")
        h, w = shape
        if h % self.scale or w % self.scale:
            raise ValueError(f"scale {self.scale} does not divide {w}x{h}")
        if self.lr_depth is not None:
            expected = (h // self.scale, w // self.scale)
            if self.lr_depth.shape != expected:
                raise ValueError(
                    f"LR depth shape {self.lr_depth.shape} != expected {expected}"
                )
        if self.object_map is not None:
            stray = self.object_map.as_bool() & ~self.definition.as_bool()
            if stray.any():
                raise ValueError("object map marks pixels outside the defined set")
        self.intrinsics.validate_for(w, h)

    @property
    def height(self) -> int:
        return self.hr_depth.height

    @property
    def width(self) -> int:
        return self.hr_depth.width


def definition_map(depth: DepthMap) -> DefinitionMap:
    """Binary map that is 1 exactly where the depth pixel is defined."""
    return DefinitionMap(np.isfinite(depth.data).astype(np.uint8))
