"""Nearest-neighbor and bicubic upsampling, definition re-masking."""

import numpy as np
import pytest

from depthsr.core import DefinitionMap, DepthMap, definition_map
from depthsr.prep import FillConfig, classify_holes, fill_depth
from depthsr.upsample import remask, upsample_bicubic, upsample_nn

U = np.nan


def depth_of(values) -> DepthMap:
    return DepthMap(np.array(values, dtype=np.float32))


def nan_equal(a, b):
    return ((a == b) | (np.isnan(a) & np.isnan(b))).all()


class TestUpsampleNN:
    def test_s1_identity(self):
        d = depth_of([[100.0, U], [300.0, 400.0]])
        assert nan_equal(upsample_nn(d, 1).data, d.data)

    def test_single_pixel_expansion(self):
        out = upsample_nn(depth_of([[400.0]]), 3)
        assert out.shape == (3, 3)
        assert (out.data == 400.0).all()

    def test_quadrant_replication(self):
        d = depth_of([[1.0, 2.0], [3.0, 4.0]])
        out = upsample_nn(d, 2)
        for r in range(4):
            for c in range(4):
                assert out.data[r, c] == d.data[r // 2, c // 2]

    def test_undefined_expands_to_undefined_blocks(self):
        out = upsample_nn(depth_of([[U, 500.0]]), 2)
        assert np.isnan(out.data[:, :2]).all()
        assert (out.data[:, 2:] == 500.0).all()

    def test_no_new_values(self):
        rng = np.random.default_rng(3)
        data = rng.uniform(10, 900, (5, 6)).astype(np.float32)
        out = upsample_nn(DepthMap(data), 3)
        assert set(out.data.ravel().tolist()) <= set(data.ravel().tolist())

    def test_error_on_zero(self):
        with pytest.raises(ValueError):
            upsample_nn(depth_of([[1.0]]), 0)


def catmull_rom(x: float, a: float = -0.5) -> float:
    x = abs(x)
    if x <= 1.0:
        return (a + 2) * x**3 - (a + 3) * x**2 + 1
    if x < 2.0:
        return a * x**3 - 5 * a * x**2 + 8 * a * x - 4 * a
    return 0.0


def reference_bicubic_1d(src: np.ndarray, s: int, i: int) -> float:
    """Direct kernel evaluation with clamp-to-edge, output index i."""
    coord = (i + 0.5) / s - 0.5
    base = int(np.floor(coord))
    frac = coord - base
    total = 0.0
    for tap in range(-1, 3):
        idx = min(max(base + tap, 0), len(src) - 1)
        total += float(src[idx]) * catmull_rom(frac - tap)
    return total


class TestUpsampleBicubic:
    def test_constant_preserved(self):
        out = upsample_bicubic(DepthMap(np.full((4, 4), 321.5, np.float32)), 4)
        assert np.abs(out.data - 321.5).max() < 1e-6 * 321.5

    def test_linear_ramp_interior(self):
        n = 16
        s = 4
        ramp = (200.0 + 3.0 * np.arange(n, dtype=np.float32))[None, :].repeat(
            6, axis=0
        )
        out = upsample_bicubic(DepthMap(ramp), s)
        cols = np.arange(n * s)
        expected = 200.0 + 3.0 * ((cols + 0.5) / s - 0.5)
        interior = slice(2 * s, -2 * s)
        err = np.abs(out.data[10, interior] - expected[interior]).max()
        assert err < 1e-3  # float32 storage of ~250 mm values

    def test_step_edge_overshoots(self):
        row = np.array([300.0] * 8 + [400.0] * 8, dtype=np.float32)
        d = DepthMap(np.tile(row, (4, 1)))
        out = upsample_bicubic(d, 4)
        assert out.data.max() > 400.0 + 1.0
        assert out.data.min() < 300.0 - 1.0

    def test_matches_direct_kernel_evaluation(self):
        # Independent evaluation of the separable kernel at several samples.
        rng = np.random.default_rng(5)
        src = rng.uniform(200, 800, 9).astype(np.float32)
        d = DepthMap(src[None, :].repeat(4, axis=0))
        s = 3
        out = upsample_bicubic(d, s)
        for i in (0, 5, 13, 26):
            want = reference_bicubic_1d(src.astype(np.float64), s, i)
            assert abs(float(out.data[6, i]) - want) < 1e-3

    def test_rejects_undefined(self):
        with pytest.raises(ValueError):
            upsample_bicubic(depth_of([[U, 100.0]]), 2)

    def test_dimensions(self):
        out = upsample_bicubic(DepthMap(np.full((3, 5), 100.0, np.float32)), 4)
        assert out.shape == (12, 20)


class TestRemask:
    def test_all_ones_identity(self):
        d = depth_of([[10.0, 20.0]])
        out = remask(d, DefinitionMap(np.ones((1, 2), dtype=np.uint8)))
        assert (out.data == d.data).all()

    def test_all_zeros_fully_undefined(self):
        d = depth_of([[10.0, 20.0]])
        out = remask(d, DefinitionMap(np.zeros((1, 2), dtype=np.uint8)))
        assert np.isnan(out.data).all()

    def test_checkerboard(self):
        d = DepthMap(np.arange(1, 17, dtype=np.float32).reshape(4, 4))
        mask = np.indices((4, 4)).sum(axis=0) % 2
        out = remask(d, DefinitionMap(mask.astype(np.uint8)))
        assert nan_equal(
            out.data, np.where(mask == 1, d.data, np.float32(np.nan))
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            remask(depth_of([[1.0]]), DefinitionMap(np.ones((2, 2), np.uint8)))

    def test_remask_of_fill_restores_definition(self):
        rng = np.random.default_rng(7)
        data = rng.uniform(10, 900, (12, 12)).astype(np.float32)
        data[rng.random((12, 12)) < 0.35] = U
        d = DepthMap(data)
        definition = definition_map(d)
        filled = fill_depth(
            d,
            classify_holes(definition),
            FillConfig(background_value_depth=1500.0),
        )
        restored = remask(filled, definition)
        assert nan_equal(restored.data, d.data)
