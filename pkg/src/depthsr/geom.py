"""Point-cloud geometry: unprojection, outlier removal, distance statistics.

Nearest-neighbor queries use an exact k-d tree (scipy.spatial.cKDTree);
approximate search is deliberately not offered because results must agree
with brute force.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .core import CameraIntrinsics, DefinitionMap, DepthMap


@dataclass(frozen=True)
class PointCloud:
    """Unordered 3D points in camera space (millimeters).

    colors are per-point RGB in [0, 1]; source_index keeps the (row, col)
    provenance of points that came from a depth map.
    """

    points: np.ndarray
    colors: Optional[np.ndarray] = None
    source_index: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must be (N, 3), got {pts.shape}")
        if not np.isfinite(pts).all():
            raise ValueError("points contain non-finite coordinates")
        object.__setattr__(self, "points", pts)
        if self.colors is not None:
            col = np.asarray(self.colors, dtype=np.float64)
            if col.shape != (len(pts), 3):
                raise ValueError("colors must match points in length")
            object.__setattr__(self, "colors", col)
        if self.source_index is not None:
            src = np.asarray(self.source_index, dtype=np.int64)
            if src.shape != (len(pts), 2):
                raise ValueError("source_index must match points in length")
            object.__setattr__(self, "source_index", src)

    def __len__(self) -> int:
        return len(self.points)

    def take(self, mask: np.ndarray) -> "PointCloud":
        """Subset by boolean mask, preserving order, colors and provenance."""
        return PointCloud(
            points=self.points[mask],
            colors=None if self.colors is None else self.colors[mask],
            source_index=(
                None if self.source_index is None else self.source_index[mask]
            ),
        )

    def with_colors(self, colors: np.ndarray) -> "PointCloud":
        return PointCloud(
            points=self.points, colors=colors, source_index=self.source_index
        )


@dataclass(frozen=True)
class OutlierParams:
    """Statistical outlier removal parameters."""

    k_neighbors: int = 20
    std_ratio: float = 2.0

    def __post_init__(self) -> None:
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if not self.std_ratio > 0:
            raise ValueError("std_ratio must be positive")


@dataclass(frozen=True)
class DistanceStats:
    """Moments of a per-point distance distribution, in millimeters."""

    min: float
    max: float
    mean: float
    per_point: np.ndarray

    @classmethod
    def from_distances(cls, distances: np.ndarray) -> "DistanceStats":
        d = np.asarray(distances, dtype=np.float64)
        if d.size == 0:
            raise ValueError("cannot build stats from an empty distance set")
        if (d < 0).any():
            raise ValueError("distances must be non-negative")
        return cls(
            min=float(d.min()), max=float(d.max()), mean=float(d.mean()),
            per_point=d,
        )


def unproject(
    depth: DepthMap,
    definition: DefinitionMap,
    intrinsics: CameraIntrinsics,
) -> PointCloud:
    """Lift defined pixels to 3D camera space through the pinhole model.

    X = (col - cx) * z / fx, Y = (row - cy) * z / fy, Z = z. Points come
    out in row-major pixel order with (row, col) provenance attached.
    """
    if depth.shape != definition.shape:
        raise ValueError(
            f"definition shape {definition.shape} != depth shape {depth.shape}"
        )
    intrinsics.validate_for(depth.width, depth.height)
    mask = definition.as_bool()
    rows, cols = np.nonzero(mask)
    z = depth.data[rows, cols].astype(np.float64)
    if np.isnan(z).any():
        raise ValueError("definition marks pixels where depth is undefined")
    x = (cols - intrinsics.cx) * z / intrinsics.fx
    y = (rows - intrinsics.cy) * z / intrinsics.fy
    points = np.stack([x, y, z], axis=1)
    return PointCloud(points=points, source_index=np.stack([rows, cols], axis=1))


def mean_knn_distances(points: np.ndarray, k: int) -> np.ndarray:
    """Per-point mean Euclidean distance to the k nearest neighbors
    (excluding the point itself)."""
    tree = cKDTree(points)
    # k+1 because the query point itself comes back at distance 0.
    dists, _ = tree.query(points, k=k + 1)
    return dists[:, 1:].mean(axis=1)


def remove_outliers(
    cloud: PointCloud, params: OutlierParams = OutlierParams()
) -> tuple[PointCloud, int]:
    """Drop points whose mean k-NN distance exceeds mu + ratio * sigma.

    mu and sigma are the mean and (population) standard deviation of the
    per-point mean distances over the whole cloud. Survivors keep their
    order, colors and provenance. Returns (filtered cloud, removed count).
    """
    n = len(cloud)
    if n <= params.k_neighbors:
        raise ValueError(
            f"cloud has {n} points, need more than k={params.k_neighbors}"
        )
    means = mean_knn_distances(cloud.points, params.k_neighbors)
    mu = means.mean()
    sigma = means.std()
    keep = means <= mu + params.std_ratio * sigma
    return cloud.take(keep), int(n - keep.sum())


def nn_distances(
    candidate: PointCloud, reference: PointCloud, symmetric: bool = False
) -> DistanceStats:
    """Exact nearest-neighbor distance statistics, candidate -> reference.

    per_point[i] is the distance from candidate point i to its nearest
    reference point. With symmetric=True the reverse direction is appended
    and the moments cover both.
    """
    if len(candidate) == 0 or len(reference) == 0:
        raise ValueError("nn_distances requires non-empty clouds")
    forward, _ = cKDTree(reference.points).query(candidate.points, k=1)
    if symmetric:
        backward, _ = cKDTree(candidate.points).query(reference.points, k=1)
        return DistanceStats.from_distances(np.concatenate([forward, backward]))
    return DistanceStats.from_distances(forward)


def color_by_distance(stats: DistanceStats, threshold: float = 2.0) -> np.ndarray:
    """Map distances to RGB: blue at 0, green at threshold/2, red at and
    beyond the threshold (linear ramps in between)."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    x = np.clip(stats.per_point / threshold, 0.0, 1.0)
    colors = np.zeros((len(x), 3), dtype=np.float64)
    lo = x <= 0.5
    colors[lo, 1] = 2.0 * x[lo]
    colors[lo, 2] = 1.0 - 2.0 * x[lo]
    hi = ~lo
    colors[hi, 0] = 2.0 * x[hi] - 1.0
    colors[hi, 1] = 2.0 - 2.0 * x[hi]
    return colors
