"""Readers and writers for the pipeline's on-disk sample format.

The trainer talks to the data pipeline exclusively through its files:
grayscale little-endian PFM depth maps (millimeters, 0.0 = undefined),
16-bit grayscale PNG intensity in [0, 1], 8-bit 0/255 mask PNGs and a
meta.json with intrinsics and the downsample scale.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

DEPTH_HR_FILE = "depth_hr.pfm"
DEPTH_LR_FILE = "depth_lr.pfm"
INTENSITY_FILE = "intensity.png"
DEFINITION_FILE = "definition.png"
OBJECT_FILE = "object.png"
META_FILE = "meta.json"


def read_pfm(path) -> np.ndarray:
    """Grayscale PFM to a float32 array; 0.0 pixels become NaN."""
    path = Path(path)
    with open(path, "rb") as f:
        if f.readline().strip() != b"Pf":
            raise ValueError(f"{path}: not a grayscale PFM")
        width, height = (int(v) for v in f.readline().split())
        scale = float(f.readline())
        dtype = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(f.read(width * height * 4), dtype=dtype)
    if data.size != width * height:
        raise ValueError(f"{path}: truncated PFM payload")
    data = np.flipud(data.reshape(height, width)).astype(np.float32)
    return np.where(data == 0.0, np.float32(np.nan), data)


def write_pfm(path, data: np.ndarray) -> None:
    """Float32 array to grayscale little-endian PFM; NaN stored as 0.0."""
    data = np.asarray(data, dtype=np.float32)
    out = np.where(np.isnan(data), np.float32(0.0), data)
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{data.shape[1]} {data.shape[0]}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(np.flipud(out).astype("<f4").tobytes())


def read_intensity(path) -> np.ndarray:
    with Image.open(path) as img:
        arr = np.asarray(img)
    if arr.dtype == np.uint16:
        return (arr.astype(np.float32)) / np.float32(65535.0)
    if arr.dtype == np.uint8:
        return (arr.astype(np.float32)) / np.float32(255.0)
    if arr.dtype == np.int32:
        return (arr.astype(np.float32)) / np.float32(65535.0)
    raise ValueError(f"{path}: unsupported intensity dtype {arr.dtype}")


def read_mask(path) -> np.ndarray:
    with Image.open(path) as img:
        arr = np.asarray(img, dtype=np.uint8)
    return (arr == 255).astype(np.float32)


def read_meta(path) -> dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


class SampleFiles:
    """Lazy view of one prepared sample directory."""

    def __init__(self, dir_path) -> None:
        self.dir = Path(dir_path)
        meta = read_meta(self.dir / META_FILE)
        self.scale = int(meta["scale"])

    def hr_depth(self) -> np.ndarray:
        return read_pfm(self.dir / DEPTH_HR_FILE)

    def lr_depth(self) -> np.ndarray:
        return read_pfm(self.dir / DEPTH_LR_FILE)

    def intensity(self) -> np.ndarray:
        return read_intensity(self.dir / INTENSITY_FILE)

    def definition(self) -> np.ndarray:
        return read_mask(self.dir / DEFINITION_FILE)

    def object_map(self) -> np.ndarray:
        return read_mask(self.dir / OBJECT_FILE)

    def is_prepared(self) -> bool:
        return (
            (self.dir / DEPTH_LR_FILE).exists()
            and (self.dir / OBJECT_FILE).exists()
        )


def find_samples(corpus_dir) -> list[SampleFiles]:
    root = Path(corpus_dir)
    if (root / META_FILE).exists():
        return [SampleFiles(root)]
    dirs = sorted(p for p in root.iterdir() if (p / META_FILE).exists())
    if not dirs:
        raise FileNotFoundError(f"no sample directories under {root}")
    return [SampleFiles(d) for d in dirs]


def nn_upsample(lr: np.ndarray, s: int) -> np.ndarray:
    """Nearest-neighbor pre-expansion of the LR depth map."""
    return np.repeat(np.repeat(lr, s, axis=0), s, axis=1)
