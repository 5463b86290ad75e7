"""Benchmark records and the quadratic processing-time model.

Stage timings grow roughly quadratically with pixel count, so times at an
unmeasured resolution are extrapolated by fitting a second-degree
polynomial in pixel count to the measured points.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class BenchRecord:
    """One timed pipeline stage at one resolution."""

    stage: str
    width: int
    height: int
    seconds: float
    repetitions: int

    def __post_init__(self) -> None:
        if not self.seconds > 0:
            raise ValueError("seconds must be positive")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")

    @property
    def pixels(self) -> int:
        return self.width * self.height

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "w": self.width,
            "h": self.height,
            "seconds": self.seconds,
            "reps": self.repetitions,
        }


@dataclass(frozen=True)
class TimeModel:
    """t(n) = a * n^2 + b * n + c with n the pixel count."""

    a: float
    b: float
    c: float

    def predict(self, pixel_count: float) -> float:
        n = float(pixel_count)
        return self.a * n * n + self.b * n + self.c


def fit_time_model(samples: Sequence[tuple[float, float]]) -> TimeModel:
    """Least-squares degree-2 fit of seconds against pixel count.

    The abscissa is rescaled internally so the fit stays well conditioned
    for multi-megapixel counts. Needs at least 3 distinct pixel counts.
    """
    if len(samples) < 3:
        raise ValueError("need at least 3 samples for a quadratic fit")
    n = np.array([float(p) for p, _ in samples], dtype=np.float64)
    t = np.array([float(s) for _, s in samples], dtype=np.float64)
    if np.unique(n).size < 3:
        raise ValueError("need at least 3 distinct pixel counts")
    scale = n.max()
    x = n / scale
    vand = np.stack([x * x, x, np.ones_like(x)], axis=1)
    coeffs, *_ = np.linalg.lstsq(vand, t, rcond=None)
    return TimeModel(
        a=float(coeffs[0] / (scale * scale)),
        b=float(coeffs[1] / scale),
        c=float(coeffs[2]),
    )


def time_stage(
    stage: str,
    width: int,
    height: int,
    fn: Callable[[], object],
    repetitions: int = 3,
) -> BenchRecord:
    """Run fn repetitions times and record the median wall time.

    Runs sequentially on the calling thread so records are comparable.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    times = []
    for _ in range(repetitions):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return BenchRecord(
        stage=stage,
        width=width,
        height=height,
        seconds=float(np.median(times)),
        repetitions=repetitions,
    )
