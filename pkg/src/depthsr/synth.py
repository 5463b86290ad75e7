"""Synthetic structured-light scene generator.

Renders a single object resting on a flat ground plane with a pinhole
camera at the origin looking down +Z. Like the real scans, the ground is
tilted so depth grows toward the top of the image (plane z = d0 - tilt*y in
camera space); the plane search relies on that gradient. Undefined regions
mimic the scanner: a border frame around the image and the shadow the
object casts from an off-axis projector. Depth gets additive Gaussian
noise; intensity is a Lambertian shading of the same geometry, quantized
to the 16-bit grid so file round trips are exact.

Note the default border margin stays below the 20x20 grid-cell center
offset for images of 180 px and up, so the plane search never samples
border-filled pixels on default-sized scenes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    CameraIntrinsics,
    DefinitionMap,
    DepthMap,
    IntensityMap,
    ObjectMap,
    Sample,
)

OBJECT_KINDS = ("box", "sphere", "superellipsoid")

_SUPERELLIPSOID_EXPONENT = 4.0
_GROUND_ALBEDO = 0.55
_OBJECT_ALBEDO = 0.85
_AMBIENT = 0.08
_SHADOW_FACTOR = 0.15


@dataclass(frozen=True)
class ObjectPose:
    """Object placement on the ground plane: translation in mm, yaw in
    radians about the vertical (camera Z) axis."""

    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0


@dataclass(frozen=True)
class SceneConfig:
    width: int = 320
    height: int = 240
    ground_depth: float = 1000.0
    ground_tilt: float = 0.12
    object_kind: str = "box"
    object_size: tuple[float, float, float] = (100.0, 100.0, 50.0)
    object_pose: ObjectPose = field(default_factory=ObjectPose)
    projector_offset: tuple[float, float, float] = (120.0, 0.0, 0.0)
    noise_sigma: float = 0.3
    outlier_fraction: float = 0.002
    border_margin: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("scene dimensions must be positive")
        if self.object_kind not in OBJECT_KINDS:
            raise ValueError(
                f"object_kind must be one of {OBJECT_KINDS}, got {self.object_kind!r}"
            )
        if any(s < 0 for s in self.object_size):
            raise ValueError("object_size components must be non-negative")
        if not self.ground_depth > self.object_height + 1.0:
            raise ValueError("ground_depth must exceed object height + 1 mm")
        if not 0.0 <= self.ground_tilt < 1.0:
            raise ValueError("ground_tilt must lie in [0, 1)")
        if self.border_margin < 0:
            raise ValueError("border_margin must be >= 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if not 0.0 <= self.outlier_fraction <= 0.05:
            raise ValueError("outlier_fraction must lie in [0, 0.05]")

    @property
    def object_height(self) -> float:
        if self.object_kind == "sphere":
            return self.object_size[0]
        return self.object_size[2]

    def intrinsics(self) -> CameraIntrinsics:
        f = 1.25 * max(self.width, self.height)
        return CameraIntrinsics(
            fx=f, fy=f, cx=(self.width - 1) / 2.0, cy=(self.height - 1) / 2.0
        )

    def ground_depth_at(self, y: float) -> float:
        """Depth of the ground plane z = ground_depth - tilt * y at camera-
        space height y (mm); ground_depth is the depth on the principal ray."""
        return self.ground_depth - self.ground_tilt * y

    def object_center(self) -> np.ndarray:
        rest = self.ground_depth_at(self.object_pose.y)
        if self.object_kind == "sphere":
            z = rest - self.object_size[0] / 2.0
        else:
            z = rest - self.object_size[2] / 2.0
        return np.array(
            [self.object_pose.x, self.object_pose.y, z], dtype=np.float64
        )


def _yaw_matrix(yaw: float) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


class _ObjectGeometry:
    """Ray intersection and surface normals for the configured object.

    Rays are origin + t * direction with unnormalized directions; hit
    parameters t are returned in that parametrization (np.inf on miss).
    """

    def __init__(self, config: SceneConfig) -> None:
        self.kind = config.object_kind
        self.center = config.object_center()
        self.rot = _yaw_matrix(config.object_pose.yaw)
        size = config.object_size
        if self.kind == "sphere":
            self.radius = size[0] / 2.0
            self.half = np.array([self.radius] * 3)
        else:
            self.half = np.array([size[0] / 2.0, size[1] / 2.0, size[2] / 2.0])
        self.degenerate = bool(np.any(self.half <= 0))

    def _to_local(self, origin: np.ndarray, dirs: np.ndarray):
        o = (origin - self.center) @ self.rot
        d = dirs @ self.rot
        return o, d

    def intersect(self, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        """Smallest t > 0 where origin + t*dirs enters the object."""
        if self.degenerate:
            return np.full(dirs.shape[:-1], np.inf)
        if self.kind == "sphere":
            return self._intersect_sphere(origin, dirs)
        o, d = self._to_local(origin, dirs)
        t0, t1 = self._slab(o, d)
        if self.kind == "box":
            t = np.where((t0 <= t1) & (t1 > 0) & (t0 > 0), t0, np.inf)
            return t
        return self._intersect_superellipsoid(o, d, t0, t1)

    def _intersect_sphere(self, origin: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        oc = origin - self.center
        a = np.sum(dirs * dirs, axis=-1)
        b = 2.0 * np.sum(dirs * oc, axis=-1)
        c = float(oc @ oc) - self.radius**2
        disc = b * b - 4.0 * a * c
        hit = disc >= 0
        sq = np.sqrt(np.where(hit, disc, 0.0))
        t = (-b - sq) / (2.0 * a)
        return np.where(hit & (t > 0), t, np.inf)

    def _slab(self, o: np.ndarray, d: np.ndarray):
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / d
            lo = (-self.half - o) * inv
            hi = (self.half - o) * inv
        # Parallel rays: inside the slab -> (-inf, inf), outside -> empty.
        par = d == 0
        inside = np.abs(o) <= self.half
        lo = np.where(par, np.where(inside, -np.inf, np.inf), lo)
        hi = np.where(par, np.where(inside, np.inf, -np.inf), hi)
        tmin = np.minimum(lo, hi).max(axis=-1)
        tmax = np.maximum(lo, hi).min(axis=-1)
        return tmin, tmax

    def _implicit(self, p: np.ndarray) -> np.ndarray:
        q = p / self.half
        e = _SUPERELLIPSOID_EXPONENT
        return np.sum(np.abs(q) ** e, axis=-1) - 1.0

    def _intersect_superellipsoid(
        self, o: np.ndarray, d: np.ndarray, t0: np.ndarray, t1: np.ndarray
    ) -> np.ndarray:
        valid = (t0 <= t1) & (t1 > 0)
        t0 = np.where(valid, np.maximum(t0, 0.0), 0.0)
        t1 = np.where(valid, t1, 0.0)
        # March the bounding-box span to find the first sign change, then
        # bisect it down.
        steps = 48
        t_enter = np.full(t0.shape, np.inf)
        prev_t = t0.copy()
        prev_f = self._implicit(o + prev_t[..., None] * d)
        for i in range(1, steps + 1):
            cur_t = t0 + (t1 - t0) * (i / steps)
            cur_f = self._implicit(o + cur_t[..., None] * d)
            crossed = (prev_f > 0) & (cur_f <= 0) & np.isinf(t_enter) & valid
            if crossed.any():
                a_t = prev_t[crossed]
                b_t = cur_t[crossed]
                dc = d[crossed]
                for _ in range(40):
                    m_t = 0.5 * (a_t + b_t)
                    m_f = self._implicit(o + m_t[:, None] * dc)
                    go_right = m_f > 0
                    a_t = np.where(go_right, m_t, a_t)
                    b_t = np.where(go_right, b_t, m_t)
                t_enter[crossed] = 0.5 * (a_t + b_t)
            prev_t, prev_f = cur_t, cur_f
        return t_enter

    def normals(self, hits: np.ndarray) -> np.ndarray:
        """Outward unit normals at hit points (world frame)."""
        local = (hits - self.center) @ self.rot
        if self.kind == "sphere":
            n = hits - self.center
        elif self.kind == "box":
            q = local / self.half
            axis = np.argmax(np.abs(q), axis=-1)
            n_local = np.zeros_like(local)
            idx = np.arange(local.shape[0])
            n_local[idx, axis] = np.sign(q[idx, axis])
            n = n_local @ self.rot.T
        else:
            e = _SUPERELLIPSOID_EXPONENT
            q = local / self.half
            g_local = e * np.sign(q) * np.abs(q) ** (e - 1.0) / self.half
            n = g_local @ self.rot.T
        norm = np.linalg.norm(n, axis=-1, keepdims=True)
        norm[norm == 0] = 1.0
        return n / norm


def _camera_rays(config: SceneConfig) -> np.ndarray:
    intr = config.intrinsics()
    u = (np.arange(config.width) - intr.cx) / intr.fx
    v = (np.arange(config.height) - intr.cy) / intr.fy
    dirs = np.empty((config.height, config.width, 3), dtype=np.float64)
    dirs[..., 0] = u[None, :]
    dirs[..., 1] = v[:, None]
    dirs[..., 2] = 1.0
    return dirs


def _render(config: SceneConfig):
    """Noiseless geometry pass shared by generate_scene and gt_object_mask.

    Returns (depth, object_hit_mask, shadow_mask, hit_points, geometry).
    Depth at a pixel is the camera-space Z of the first surface along its
    ray (object if it occludes the ground, else the ground plane).
    """
    geom = _ObjectGeometry(config)
    dirs = _camera_rays(config)
    origin = np.zeros(3)

    center = geom.center
    intr = config.intrinsics()
    u = intr.cx + intr.fx * center[0] / center[2]
    v = intr.cy + intr.fy * center[1] / center[2]
    if not (0 <= u < config.width and 0 <= v < config.height):
        raise ValueError("object projects outside the camera frustum")

    t_obj = geom.intersect(origin, dirs)
    # Ray p = t*(u, v, 1) meets the plane z = d0 - tilt*y at
    # t = d0 / (1 + tilt*v); rays have dz = 1 so t equals Z.
    t_ground = config.ground_depth / (1.0 + config.ground_tilt * dirs[..., 1])
    obj_mask = t_obj < t_ground
    depth = np.where(obj_mask, t_obj, t_ground)
    hits = dirs * depth[..., None]

    proj = np.asarray(config.projector_offset, dtype=np.float64)
    shadow = np.zeros(obj_mask.shape, dtype=bool)
    ground_pts = hits[~obj_mask]
    if ground_pts.size and not geom.degenerate:
        seg = ground_pts - proj
        t_hit = geom.intersect(proj, seg)
        shadow[~obj_mask] = t_hit < 1.0
    return depth, obj_mask, shadow, hits, geom


def _border_mask(config: SceneConfig) -> np.ndarray:
    mask = np.zeros((config.height, config.width), dtype=bool)
    m = config.border_margin
    if m > 0:
        mask[:m, :] = True
        mask[-m:, :] = True
        mask[:, :m] = True
        mask[:, -m:] = True
    return mask


def _shade(config: SceneConfig, obj_mask, shadow, hits, geom) -> np.ndarray:
    proj = np.asarray(config.projector_offset, dtype=np.float64)
    normals = np.zeros_like(hits)
    # Ground plane z = d0 - tilt*y has camera-facing normal (0, -tilt, -1).
    g_norm = math.sqrt(1.0 + config.ground_tilt**2)
    normals[..., 1] = -config.ground_tilt / g_norm
    normals[..., 2] = -1.0 / g_norm
    if obj_mask.any():
        n_obj = geom.normals(hits[obj_mask])
        # Keep normals camera-facing.
        flip = np.sum(n_obj * hits[obj_mask], axis=-1) > 0
        n_obj[flip] *= -1.0
        normals[obj_mask] = n_obj
    to_light = proj - hits
    to_light /= np.linalg.norm(to_light, axis=-1, keepdims=True)
    diffuse = np.clip(np.sum(normals * to_light, axis=-1), 0.0, None)
    albedo = np.where(obj_mask, _OBJECT_ALBEDO, _GROUND_ALBEDO)
    lit = np.where(shadow, _SHADOW_FACTOR, 1.0)
    intensity = np.clip(_AMBIENT + albedo * diffuse * lit, 0.0, 1.0)
    # Quantize to the 16-bit PNG grid so write/read round trips are exact.
    return (np.round(intensity * 65535.0) / 65535.0).astype(np.float32)


def generate_scene(config: SceneConfig) -> Sample:
    """Render one scene into a Sample (HR depth, intensity, definition map,
    intrinsics). Deterministic for a fixed config."""
    depth, obj_mask, shadow, hits, geom = _render(config)
    undefined = _border_mask(config) | shadow
    if config.noise_sigma > 0:
        rng = np.random.default_rng(config.seed)
        depth = depth + rng.normal(0.0, config.noise_sigma, size=depth.shape)
        if config.outlier_fraction > 0:
            # Sparse "flying pixels": heavy-tailed spikes like the ones a
            # real scanner produces near discontinuities. Magnitudes scale
            # with noise_sigma so noiseless renders stay pristine.
            spikes = rng.random(depth.shape) < config.outlier_fraction
            magnitude = rng.uniform(
                30.0 * config.noise_sigma, 120.0 * config.noise_sigma,
                size=depth.shape,
            )
            sign = np.where(rng.random(depth.shape) < 0.5, -1.0, 1.0)
            depth = np.where(spikes, depth + sign * magnitude, depth)
    depth32 = depth.astype(np.float32)
    depth32[undefined] = np.nan
    intensity = _shade(config, obj_mask, shadow, hits, geom)
    return Sample(
        hr_depth=DepthMap(depth32),
        intensity=IntensityMap(intensity),
        definition=DefinitionMap((~undefined).astype(np.uint8)),
        intrinsics=config.intrinsics(),
        scale=1,
        metadata={
            "kind": config.object_kind,
            "seed": str(config.seed),
            "ground_depth": repr(config.ground_depth),
        },
    )


def gt_object_mask(config: SceneConfig) -> ObjectMap:
    """Analytic ground-truth object mask: pixels whose ray hits the object
    before the ground, clipped to the generated definition region."""
    _, obj_mask, _, _, _ = _render(config)
    mask = obj_mask & ~_border_mask(config)
    return ObjectMap(mask.astype(np.uint8))


def randomized_config(
    seed: int,
    width: int = 320,
    height: int = 240,
    ground_depth: float = 1000.0,
    object_kind: str | None = None,
    noise_sigma: float = 0.3,
    border_margin: int = 4,
    ground_tilt: float = 0.12,
    outlier_fraction: float = 0.002,
) -> SceneConfig:
    """Derive a varied scene deterministically from a seed: object kind,
    size and pose are drawn from ranges that keep the object well inside
    the defined region."""
    rng = np.random.default_rng(seed)
    kind = object_kind or OBJECT_KINDS[int(rng.integers(len(OBJECT_KINDS)))]
    if kind == "sphere":
        diameter = float(rng.uniform(40.0, 90.0))
        size = (diameter, diameter, diameter)
    else:
        size = (
            float(rng.uniform(50.0, 120.0)),
            float(rng.uniform(50.0, 120.0)),
            float(rng.uniform(25.0, 70.0)),
        )
    f = 1.25 * max(width, height)
    # Lateral extent visible on the ground, minus the object and shadow slack.
    x_max = (width / 2.0) / f * ground_depth
    y_max = (height / 2.0) / f * ground_depth
    slack = max(size) * 1.2
    pose = ObjectPose(
        x=float(rng.uniform(-1, 1) * max(0.0, 0.5 * x_max - slack)),
        y=float(rng.uniform(-1, 1) * max(0.0, 0.5 * y_max - slack)),
        yaw=float(rng.uniform(0.0, math.pi)),
    )
    return SceneConfig(
        width=width,
        height=height,
        ground_depth=ground_depth,
        ground_tilt=ground_tilt,
        object_kind=kind,
        object_size=size,
        object_pose=pose,
        projector_offset=(120.0, 0.0, 0.0),
        noise_sigma=noise_sigma,
        outlier_fraction=outlier_fraction,
        border_margin=border_margin,
        seed=seed,
    )


def with_seed(config: SceneConfig, seed: int) -> SceneConfig:
    return replace(config, seed=seed)
