"""File I/O for pipeline artifacts.

Formats:
  depth      grayscale PFM ("Pf"), little-endian (negative scale header),
             float32 millimeters, undefined pixels stored as 0.0
  intensity  16-bit grayscale PNG, mapped linearly to [0, 1]
  masks      8-bit grayscale PNG holding only 0 or 255
  meta       meta.json with fx, fy, cx, cy, scale and a free-form tags object
  clouds     binary little-endian PLY, float32 x y z, optional uchar RGB

A sample directory bundles depth_hr.pfm, intensity.png, definition.png,
object.png, depth_lr.pfm and meta.json (object/LR files optional until the
prepare stage has produced them).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image

from .core import (
    CameraIntrinsics,
    DefinitionMap,
    DepthMap,
    IntensityMap,
    ObjectMap,
    Sample,
)
from .geom import PointCloud

PathLike = Union[str, Path]

DEPTH_HR_FILE = "depth_hr.pfm"
DEPTH_LR_FILE = "depth_lr.pfm"
INTENSITY_FILE = "intensity.png"
DEFINITION_FILE = "definition.png"
OBJECT_FILE = "object.png"
META_FILE = "meta.json"


def write_pfm(path: PathLike, depth: DepthMap) -> None:
    """Write a grayscale PFM; NaN pixels are stored as 0.0."""
    data = np.where(np.isnan(depth.data), np.float32(0.0), depth.data)
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{depth.width} {depth.height}\n".encode("ascii"))
        f.write(b"-1.0\n")
        # PFM scanlines run bottom-to-top.
        f.write(np.flipud(data).astype("<f4").tobytes())


def read_pfm(path: PathLike) -> DepthMap:
    """Read a grayscale PFM written by write_pfm; 0.0 pixels become NaN."""
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic != b"Pf":
            raise ValueError(f"{path}: not a grayscale PFM (header {magic!r})")
        dims = f.readline().split()
        if len(dims) != 2:
            raise ValueError(f"{path}: malformed PFM dimensions line")
        try:
            width, height = int(dims[0]), int(dims[1])
        except ValueError as exc:
            raise ValueError(f"{path}: malformed PFM dimensions line") from exc
        if width < 1 or height < 1:
            raise ValueError(f"{path}: invalid PFM dimensions {width}x{height}")
        try:
            scale = float(f.readline())
        except ValueError as exc:
            raise ValueError(f"{path}: malformed PFM scale line") from exc
        if abs(abs(scale) - 1.0) > 1e-12:
            raise ValueError(f"{path}: unsupported PFM scale {scale}")
        dtype = "<f4" if scale < 0 else ">f4"
        raw = f.read(width * height * 4)
    if len(raw) != width * height * 4:
        raise ValueError(f"{path}: truncated PFM payload")
    data = np.frombuffer(raw, dtype=dtype).reshape(height, width)
    data = np.flipud(data).astype(np.float32)
    if np.isnan(data).any() or np.isinf(data).any():
        raise ValueError(f"{path}: PFM contains non-finite values")
    if (data < 0).any():
        raise ValueError(f"{path}: PFM contains negative depth values")
    data = np.where(data == 0.0, np.float32(np.nan), data)
    return DepthMap(data)


def write_intensity_png(path: PathLike, intensity: IntensityMap) -> None:
    """Write intensity as 16-bit grayscale PNG (v -> round(v * 65535))."""
    q = np.round(intensity.data.astype(np.float64) * 65535.0).astype(np.uint16)
    Image.fromarray(q).save(path, format="PNG")


def read_intensity_png(path: PathLike) -> IntensityMap:
    """Read a grayscale PNG; values map linearly to [0, 1]."""
    path = Path(path)
    with Image.open(path) as img:
        if img.mode == "I;16":
            arr = np.asarray(img, dtype=np.uint16)
            denom = 65535.0
        elif img.mode == "L":
            arr = np.asarray(img, dtype=np.uint8)
            denom = 255.0
        elif img.mode == "I":
            arr = np.asarray(img, dtype=np.int32)
            if arr.min() < 0 or arr.max() > 65535:
                raise ValueError(f"{path}: intensity values outside 16-bit range")
            denom = 65535.0
        else:
            raise ValueError(f"{path}: unsupported intensity PNG mode {img.mode}")
    data = (arr.astype(np.float64) / denom).astype(np.float32)
    return IntensityMap(data)


def _write_mask_png(path: PathLike, data: np.ndarray) -> None:
    Image.fromarray((data > 0).astype(np.uint8) * 255, mode="L").save(
        path, format="PNG"
    )


def _read_mask_png(path: PathLike) -> np.ndarray:
    path = Path(path)
    with Image.open(path) as img:
        if img.mode != "L":
            raise ValueError(f"{path}: mask PNG must be 8-bit grayscale")
        arr = np.asarray(img, dtype=np.uint8)
    if not np.isin(arr, (0, 255)).all():
        raise ValueError(f"{path}: mask PNG must hold only 0 or 255")
    return (arr == 255).astype(np.uint8)


def write_definition_png(path: PathLike, definition: DefinitionMap) -> None:
    _write_mask_png(path, definition.data)


def read_definition_png(path: PathLike) -> DefinitionMap:
    return DefinitionMap(_read_mask_png(path))


def write_object_png(path: PathLike, object_map: ObjectMap) -> None:
    _write_mask_png(path, object_map.data)


def read_object_png(path: PathLike) -> ObjectMap:
    return ObjectMap(_read_mask_png(path))


def write_meta(path: PathLike, intrinsics: CameraIntrinsics, scale: int,
               tags: Optional[dict] = None) -> None:
    doc = {
        "fx": intrinsics.fx,
        "fy": intrinsics.fy,
        "cx": intrinsics.cx,
        "cy": intrinsics.cy,
        "scale": scale,
        "tags": dict(tags or {}),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def read_meta(path: PathLike) -> tuple[CameraIntrinsics, int, dict]:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed meta JSON: {exc}") from exc
    try:
        intr = CameraIntrinsics(
            fx=float(doc["fx"]), fy=float(doc["fy"]),
            cx=float(doc["cx"]), cy=float(doc["cy"]),
        )
        scale = int(doc["scale"])
    except KeyError as exc:
        raise ValueError(f"{path}: meta JSON missing key {exc}") from exc
    tags = doc.get("tags", {})
    if not isinstance(tags, dict):
        raise ValueError(f"{path}: meta tags must be an object")
    return intr, scale, tags


def write_sample(sample: Sample, dir_path: PathLike) -> None:
    """Write a Sample directory; optional fields produce optional files."""
    d = Path(dir_path)
    d.mkdir(parents=True, exist_ok=True)
    write_pfm(d / DEPTH_HR_FILE, sample.hr_depth)
    write_intensity_png(d / INTENSITY_FILE, sample.intensity)
    write_definition_png(d / DEFINITION_FILE, sample.definition)
    if sample.object_map is not None:
        write_object_png(d / OBJECT_FILE, sample.object_map)
    if sample.lr_depth is not None:
        write_pfm(d / DEPTH_LR_FILE, sample.lr_depth)
    write_meta(d / META_FILE, sample.intrinsics, sample.scale, sample.metadata)


def read_sample(dir_path: PathLike) -> Sample:
    """Read a Sample directory, validating formats and cross-raster shapes."""
    d = Path(dir_path)
    for required in (DEPTH_HR_FILE, INTENSITY_FILE, DEFINITION_FILE, META_FILE):
        if not (d / required).exists():
            raise FileNotFoundError(f"missing sample file: {d / required}")
    hr_depth = read_pfm(d / DEPTH_HR_FILE)
    intensity = read_intensity_png(d / INTENSITY_FILE)
    definition = read_definition_png(d / DEFINITION_FILE)
    intrinsics, scale, tags = read_meta(d / META_FILE)
    object_map = None
    if (d / OBJECT_FILE).exists():
        object_map = read_object_png(d / OBJECT_FILE)
    lr_depth = None
    if (d / DEPTH_LR_FILE).exists():
        lr_depth = read_pfm(d / DEPTH_LR_FILE)
    try:
        return Sample(
            hr_depth=hr_depth,
            intensity=intensity,
            definition=definition,
            intrinsics=intrinsics,
            scale=scale,
            object_map=object_map,
            lr_depth=lr_depth,
            metadata=tags,
        )
    except ValueError as exc:
        raise ValueError(f"{d}: {exc}") from exc


def write_ply(path: PathLike, cloud: PointCloud) -> None:
    """Write a binary little-endian PLY (float32 xyz, optional uchar RGB)."""
    n = len(cloud.points)
    has_color = cloud.colors is not None
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {n}",
              "property float x", "property float y", "property float z"]
    if has_color:
        header += ["property uchar red", "property uchar green",
                   "property uchar blue"]
    header.append("end_header")
    xyz = cloud.points.astype("<f4")
    if has_color:
        rgb = np.clip(np.round(cloud.colors * 255.0), 0, 255).astype(np.uint8)
        rec = np.empty(
            n, dtype=[("x", "<f4"), ("y", "<f4"), ("z", "<f4"),
                      ("red", "u1"), ("green", "u1"), ("blue", "u1")],
        )
        rec["x"], rec["y"], rec["z"] = xyz[:, 0], xyz[:, 1], xyz[:, 2]
        rec["red"], rec["green"], rec["blue"] = rgb[:, 0], rgb[:, 1], rgb[:, 2]
    else:
        rec = np.empty(n, dtype=[("x", "<f4"), ("y", "<f4"), ("z", "<f4")])
        rec["x"], rec["y"], rec["z"] = xyz[:, 0], xyz[:, 1], xyz[:, 2]
    with open(path, "wb") as f:
        f.write(("\n".join(header) + "\n").encode("ascii"))
        f.write(rec.tobytes())


def read_ply(path: PathLike) -> PointCloud:
    """Read a binary PLY written by write_ply."""
    path = Path(path)
    with open(path, "rb") as f:
        if f.readline().strip() != b"ply":
            raise ValueError(f"{path}: not a PLY file")
        if f.readline().strip() != b"format binary_little_endian 1.0":
            raise ValueError(f"{path}: unsupported PLY format")
        n = None
        props: list[str] = []
        while True:
            line = f.readline()
            if not line:
                raise ValueError(f"{path}: truncated PLY header")
            line = line.strip()
            if line.startswith(b"element vertex"):
                n = int(line.split()[-1])
            elif line.startswith(b"property"):
                props.append(line.split()[-1].decode("ascii"))
            elif line == b"end_header":
                break
        if n is None:
            raise ValueError(f"{path}: PLY header missing vertex element")
        has_color = "red" in props
        if has_color:
            dtype = [("x", "<f4"), ("y", "<f4"), ("z", "<f4"),
                     ("red", "u1"), ("green", "u1"), ("blue", "u1")]
        else:
            dtype = [("x", "<f4"), ("y", "<f4"), ("z", "<f4")]
        rec = np.frombuffer(f.read(n * np.dtype(dtype).itemsize), dtype=dtype)
    if len(rec) != n:
        raise ValueError(f"{path}: truncated PLY payload")
    points = np.stack([rec["x"], rec["y"], rec["z"]], axis=1).astype(np.float64)
    colors = None
    if has_color:
        colors = np.stack(
            [rec["red"], rec["green"], rec["blue"]], axis=1
        ).astype(np.float64) / 255.0
    return PointCloud(points=points, colors=colors)


def write_distances_json(path: PathLike, distances: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump([float(v) for v in distances], f)
        f.write("\n")
