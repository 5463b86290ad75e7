"""Ground-plane extraction and object-map generation.

The scene is assumed to be a single object on a flat ground surface. Three
ground pixels are picked from a coarse grid: two from the group of cells
nearest the grid mean depth (the triangle base, at the extreme image
columns) and one from the deepest cells (the far vertex). The plane they
span separates object pixels from ground pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CameraIntrinsics, DefinitionMap, DepthMap, ObjectMap


@dataclass(frozen=True)
class Plane:
    """Oriented plane n . x = offset with the camera on the negative side."""

    normal: np.ndarray
    offset: float
    vertices: np.ndarray

    def __post_init__(self) -> None:
        n = np.asarray(self.normal, dtype=np.float64)
        v = np.asarray(self.vertices, dtype=np.float64)
        if n.shape != (3,):
            raise ValueError("normal must be a 3-vector")
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ValueError("normal must be unit length")
        if v.shape != (3, 3):
            raise ValueError("vertices must be three 3D points")
        residual = np.abs(v @ n - self.offset)
        if (residual > 1e-6).any():
            raise ValueError(f"vertices do not satisfy the plane equation "
                             f"(max residual {residual.max():.3e} mm)")
        if not -self.offset < 0:
            raise ValueError("camera origin must lie on the negative side")
        n.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "vertices", v)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        """n . p - offset; negative on the camera side."""
        return np.asarray(points, dtype=np.float64) @ self.normal - self.offset


@dataclass(frozen=True)
class PlaneSearchConfig:
    """Plane-search constants: grid size, near-mean and far fractions, and
    the object margin epsilon in millimeters."""

    grid_w: int = 20
    grid_h: int = 20
    near_mean_fraction: float = 0.05
    far_fraction: float = 0.02
    object_margin_epsilon: float = 3.0

    def __post_init__(self) -> None:
        if self.grid_w < 3 or self.grid_h < 3:
            raise ValueError("grid dimensions must be >= 3")
        for name in ("near_mean_fraction", "far_fraction"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if not self.object_margin_epsilon > 0:
            raise ValueError("object_margin_epsilon must be positive")


def _cell_bounds(total: int, cells: int, i: int) -> tuple[int, int]:
    return (i * total) // cells, ((i + 1) * total) // cells


def _center_index(lo: int, hi: int) -> int:
    # Pixel nearest the rectangle center; even sizes tie toward the
    # smaller index.
    return lo + (hi - lo - 1) // 2


def cell_center_pixel(
    shape: tuple[int, int], grid_shape: tuple[int, int], cell: tuple[int, int]
) -> tuple[int, int]:
    """Map a grid cell to the center pixel of its source rectangle."""
    h, w = shape
    gh, gw = grid_shape
    r0, r1 = _cell_bounds(h, gh, cell[0])
    c0, c1 = _cell_bounds(w, gw, cell[1])
    return _center_index(r0, r1), _center_index(c0, c1)


def grid_reduce(depth: DepthMap, config: PlaneSearchConfig) -> DepthMap:
    """Reduce a fully defined depth map to a grid_h x grid_w grid, each cell
    holding the value at the center pixel of its source rectangle."""
    h, w = depth.shape
    if config.grid_h > h or config.grid_w > w:
        raise ValueError(
            f"grid {config.grid_w}x{config.grid_h} larger than input {w}x{h}"
        )
    if not np.isfinite(depth.data).all():
        raise ValueError("grid_reduce requires a fully defined depth map")
    rows = np.array(
        [_center_index(*_cell_bounds(h, config.grid_h, i))
         for i in range(config.grid_h)]
    )
    cols = np.array(
        [_center_index(*_cell_bounds(w, config.grid_w, j))
         for j in range(config.grid_w)]
    )
    return DepthMap(depth.data[np.ix_(rows, cols)])


def select_plane_vertices(
    grid: DepthMap, config: PlaneSearchConfig = PlaneSearchConfig()
) -> tuple[tuple[int, int], tuple[int, int], tuple[int, int]]:
    """Pick three grid cells spanning the ground plane.

    A and B are the extreme-column members of the near-mean group (cells
    whose squared deviation from the grid mean falls within the lowest
    near_mean_fraction; column ties break toward the smaller row). C is the
    row-middle member of the far group (cells whose depth ranks in the
    highest far_fraction). A grid of exactly 3 cells returns its cells
    directly.
    """
    data = grid.data
    if not np.isfinite(data).all():
        raise ValueError("plane search requires a fully defined grid")
    h, w = data.shape
    n = h * w
    if n < 3:
        raise ValueError("grid must have at least 3 cells")
    if n == 3:
        cells = [(r, c) for r in range(h) for c in range(w)]
        return cells[0], cells[1], cells[2]

    # Rank squared deviations via |n*d - sum(d)|, which orders identically
    # to (d - mean)^2 but is exactly invariant under a constant depth shift
    # when the inputs are exactly representable.
    d = data.astype(np.float64).ravel()
    q = np.abs(n * d - d.sum())
    k1 = max(1, int(np.ceil(config.near_mean_fraction * n)))
    t1 = np.partition(q, k1 - 1)[k1 - 1]
    near = q <= t1

    rows, cols = np.divmod(np.nonzero(near)[0], w)
    distinct_cols = np.unique(cols)
    if distinct_cols.size < 2:
        raise ValueError(
            "near-mean group spans fewer than 2 distinct columns; "
            "cannot form the triangle base"
        )
    left = cols == cols.min()
    a = (int(rows[left].min()), int(cols.min()))
    right = cols == cols.max()
    b = (int(rows[right].min()), int(cols.max()))

    k2 = max(1, int(np.ceil(config.far_fraction * n)))
    t2 = np.partition(d, n - k2)[n - k2]
    far = d >= t2
    frows, fcols = np.divmod(np.nonzero(far)[0], w)
    order = np.lexsort((fcols, frows))
    mid = order[len(order) // 2]
    c = (int(frows[mid]), int(fcols[mid]))

    if c == a or c == b:
        raise ValueError(
            "far-group vertex coincides with a triangle base vertex; "
            "plane selection is degenerate"
        )
    return a, b, c


def fit_plane(p1: np.ndarray, p2: np.ndarray, p3: np.ndarray) -> Plane:
    """Plane through three 3D points, oriented with the camera origin on the
    negative side."""
    pts = np.array([p1, p2, p3], dtype=np.float64)
    u = pts[1] - pts[0]
    v = pts[2] - pts[0]
    cross = np.cross(u, v)
    norm = np.linalg.norm(cross)
    scale = np.linalg.norm(u) * np.linalg.norm(v)
    if scale == 0 or norm < 1e-9 * scale:
        raise ValueError("points are collinear; plane is degenerate")
    normal = cross / norm
    offset = float(np.mean(pts @ normal))
    if offset < 0:
        normal = -normal
        offset = -offset
    if offset == 0:
        raise ValueError("plane passes through the camera origin")
    return Plane(normal=normal, offset=offset, vertices=pts)


def unproject_pixel(
    intrinsics: CameraIntrinsics, row: int, col: int, z: float
) -> np.ndarray:
    return np.array(
        [
            (col - intrinsics.cx) * z / intrinsics.fx,
            (row - intrinsics.cy) * z / intrinsics.fy,
            z,
        ],
        dtype=np.float64,
    )


def ground_plane(
    depth: DepthMap,
    intrinsics: CameraIntrinsics,
    config: PlaneSearchConfig = PlaneSearchConfig(),
) -> Plane:
    """Full plane search on a filled depth map: grid reduction, vertex
    selection, unprojection through the intrinsics, plane fit."""
    grid = grid_reduce(depth, config)
    cells = select_plane_vertices(grid, config)
    points = []
    for cell in cells:
        row, col = cell_center_pixel(depth.shape, grid.shape, cell)
        points.append(unproject_pixel(intrinsics, row, col, float(depth.data[row, col])))
    return fit_plane(*points)


def object_map(
    depth: DepthMap,
    definition: DefinitionMap,
    plane: Plane,
    intrinsics: CameraIntrinsics,
    epsilon: float = 3.0,
) -> ObjectMap:
    """Mark pixels whose 3D point lies strictly more than epsilon mm on the
    camera side of the plane. Only originally-defined pixels can be marked."""
    if depth.shape != definition.shape:
        raise ValueError(
            f"definition shape {definition.shape} != depth shape {depth.shape}"
        )
    if not np.isfinite(depth.data).all():
        raise ValueError("object_map requires a fully defined depth map")
    intrinsics.validate_for(depth.width, depth.height)
    h, w = depth.shape
    z = depth.data.astype(np.float64)
    cols = np.arange(w, dtype=np.float64)
    rows = np.arange(h, dtype=np.float64)
    x = (cols[None, :] - intrinsics.cx) * z / intrinsics.fx
    y = (rows[:, None] - intrinsics.cy) * z / intrinsics.fy
    dist = (
        x * plane.normal[0] + y * plane.normal[1] + z * plane.normal[2]
        - plane.offset
    )
    mask = definition.as_bool() & (dist < -epsilon)
    return ObjectMap(mask.astype(np.uint8))
