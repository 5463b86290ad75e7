"""Depth metrics against naive double-loop references, and the quadratic
time model."""

import math

import numpy as np
import pytest

from depthsr.bench import BenchRecord, fit_time_model, time_stage
from depthsr.core import DefinitionMap, DepthMap, ObjectMap
from depthsr.metrics import LossWeights, object_loss, object_rmse, rmse
from reference import brute_object_loss, brute_object_rmse, brute_rmse


def maps_from(pred, gt, definition=None, obj=None):
    pred = np.array(pred, dtype=np.float32)
    gt = np.array(gt, dtype=np.float32)
    if definition is None:
        definition = np.ones(gt.shape, dtype=np.uint8)
    if obj is None:
        obj = np.zeros(gt.shape, dtype=np.uint8)
    return (
        DepthMap(pred),
        DepthMap(gt),
        ObjectMap(np.array(obj, dtype=np.uint8)),
        DefinitionMap(np.array(definition, dtype=np.uint8)),
    )


class TestRmse:
    def test_equal_maps(self):
        p, g, _, d = maps_from([[100.0, 200.0]], [[100.0, 200.0]])
        assert rmse(p, g, d) == 0.0

    def test_constant_offset(self):
        gt = np.full((4, 4), 500.0)
        p, g, _, d = maps_from(gt + 2.0, gt)
        assert rmse(p, g, d) == pytest.approx(2.0, rel=1e-12)

    def test_two_pixel_example(self):
        # Errors 3 and 4 on the two defined pixels: sqrt((9+16)/2).
        p, g, _, d = maps_from(
            [[103.0, 204.0, 999.0]], [[100.0, 200.0, 1.0]],
            definition=[[1, 1, 0]],
        )
        assert rmse(p, g, d) == pytest.approx(math.sqrt(12.5), rel=1e-12)

    def test_zero_defined_errors(self):
        p, g, _, d = maps_from([[1.0]], [[1.0]], definition=[[0]])
        with pytest.raises(ValueError):
            rmse(p, g, d)


class TestObjectRmse:
    def test_background_ignored(self):
        p, g, o, d = maps_from(
            [[100.0, 777.0]], [[100.0, 1.0]], obj=[[1, 0]]
        )
        assert object_rmse(p, g, o, d) == 0.0

    def test_constant_object_error(self):
        gt = np.full((2, 5), 300.0)
        obj = np.zeros((2, 5), dtype=np.uint8)
        obj[0, :] = 1
        p, g, o, d = maps_from(gt + 5.0, gt, obj=obj)
        assert object_rmse(p, g, o, d) == pytest.approx(5.0, rel=1e-12)

    def test_mixed_errors(self):
        p, g, o, d = maps_from(
            [[101.0, 102.0, 102.0]], [[100.0, 100.0, 100.0]], obj=[[1, 1, 1]]
        )
        assert object_rmse(p, g, o, d) == pytest.approx(math.sqrt(3.0), rel=1e-12)

    def test_empty_object_errors(self):
        p, g, o, d = maps_from([[1.0]], [[1.0]])
        with pytest.raises(ValueError):
            object_rmse(p, g, o, d)


class TestObjectLoss:
    def test_equal_maps(self):
        p, g, o, d = maps_from([[100.0]], [[100.0]], obj=[[1]])
        assert object_loss(p, g, o, d) == 0.0

    def test_uniform_error_is_weight_free(self):
        gt = np.full((10, 10), 400.0)
        obj = np.zeros((10, 10), dtype=np.uint8)
        obj[:3, :] = 1
        p, g, o, d = maps_from(gt + 1.0, gt, obj=obj)
        assert object_loss(p, g, o, d) == pytest.approx(1.0, rel=1e-12)

    def test_worked_example_20_over_10_9(self):
        # 100 defined pixels: 10 object with 2 mm error, 90 background
        # exact. (10*1*2) / (10*1 + 90*0.01) = 20 / 10.9.
        gt = np.full((10, 10), 500.0)
        pred = gt.copy()
        obj = np.zeros((10, 10), dtype=np.uint8)
        obj.ravel()[:10] = 1
        pred.ravel()[:10] += 2.0
        p, g, o, d = maps_from(pred, gt, obj=obj)
        assert object_loss(p, g, o, d) == pytest.approx(20.0 / 10.9, rel=1e-12)

    def test_weight_scaling_invariance(self):
        rng = np.random.default_rng(1)
        gt = rng.uniform(100, 900, (8, 8))
        pred = gt + rng.normal(0, 3, (8, 8))
        obj = (rng.random((8, 8)) < 0.3).astype(np.uint8)
        p, g, o, d = maps_from(pred, gt, obj=obj)
        a = object_loss(p, g, o, d, LossWeights(1.0, 0.01))
        b = object_loss(p, g, o, d, LossWeights(100.0, 1.0))
        assert a == pytest.approx(b, rel=1e-12)

    def test_zero_defined_errors(self):
        p, g, o, d = maps_from([[1.0]], [[1.0]], definition=[[0]])
        with pytest.raises(ValueError):
            object_loss(p, g, o, d)


class TestMetricProperties:
    def test_translation_covariance_exact(self):
        # Values on a 0.25 lattice with an integer shift stay exact in
        # float32, so the metrics must not move at all.
        rng = np.random.default_rng(2)
        gt = rng.integers(400, 2000, (8, 8)) * 0.25
        pred = gt + rng.integers(-8, 9, (8, 8)) * 0.25
        obj = (rng.random((8, 8)) < 0.4).astype(np.uint8)
        p, g, o, d = maps_from(pred, gt, obj=obj)
        p2, g2, _, _ = maps_from(pred + 64.0, gt + 64.0)
        assert rmse(p, g, d) == rmse(p2, g2, d)
        assert object_loss(p, g, o, d) == object_loss(p2, g2, o, d)
        if obj.any():
            assert object_rmse(p, g, o, d) == object_rmse(p2, g2, o, d)

    def test_all_zero_iff_equal_on_pixel_sets(self):
        rng = np.random.default_rng(3)
        gt = rng.uniform(100, 900, (6, 6)).astype(np.float32)
        definition = (rng.random((6, 6)) < 0.8).astype(np.uint8)
        definition[0, 0] = 1
        obj = definition.copy()
        pred = gt.copy()
        p, g, o, d = maps_from(pred, gt, definition=definition, obj=obj)
        assert rmse(p, g, d) == 0.0
        assert object_rmse(p, g, o, d) == 0.0
        assert object_loss(p, g, o, d) == 0.0
        pred2 = gt.copy()
        pred2[definition.astype(bool)] += 1.0
        p2 = DepthMap(pred2)
        assert rmse(p2, g, d) > 0
        assert object_rmse(p2, g, o, d) > 0
        assert object_loss(p2, g, o, d) > 0

    def test_matches_double_loop_reference(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            gt = rng.uniform(50, 1500, (16, 16))
            pred = gt + rng.normal(0, 10, (16, 16))
            definition = (rng.random((16, 16)) < 0.7).astype(np.uint8)
            obj = ((rng.random((16, 16)) < 0.3) & (definition == 1)).astype(
                np.uint8
            )
            if not definition.any():
                definition[0, 0] = 1
            if not (obj & definition).any():
                obj[definition.astype(bool)] = 1
            p, g, o, d = maps_from(pred, gt, definition=definition, obj=obj)
            pf, gf = p.data, g.data
            assert rmse(p, g, d) == pytest.approx(
                brute_rmse(pf, gf, definition), rel=1e-9
            )
            assert object_rmse(p, g, o, d) == pytest.approx(
                brute_object_rmse(pf, gf, obj, definition), rel=1e-9
            )
            assert object_loss(p, g, o, d) == pytest.approx(
                brute_object_loss(pf, gf, obj, definition), rel=1e-9
            )


class TestLossWeights:
    def test_validation(self):
        with pytest.raises(ValueError):
            LossWeights(object_weight=0.0)
        with pytest.raises(ValueError):
            LossWeights(object_weight=0.01, background_weight=1.0)


def lagrange_quadratic(points, x):
    """Independent interpolation oracle for 3-point quadratic fits."""
    (x1, y1), (x2, y2), (x3, y3) = points
    return (
        y1 * (x - x2) * (x - x3) / ((x1 - x2) * (x1 - x3))
        + y2 * (x - x1) * (x - x3) / ((x2 - x1) * (x2 - x3))
        + y3 * (x - x1) * (x - x2) / ((x3 - x1) * (x3 - x2))
    )


class TestTimeModel:
    def test_linear_data_recovers_line(self):
        samples = [(n, 1e-7 * n) for n in (10_000, 400_000, 2_000_000)]
        model = fit_time_model(samples)
        assert model.a == pytest.approx(0.0, abs=1e-16)
        assert model.b == pytest.approx(1e-7, rel=1e-9)
        assert model.predict(1_000_000) == pytest.approx(0.1, rel=1e-9)

    def test_exact_parabola_through_three_points(self):
        a, b, c = 3e-13, 2e-8, 0.01
        pts = [(n, a * n * n + b * n + c) for n in (50_000, 600_000, 1_500_000)]
        model = fit_time_model(pts)
        for n, t in pts:
            assert model.predict(n) == pytest.approx(t, rel=1e-9)
        assert model.a == pytest.approx(a, rel=1e-6)

    def test_processing_time_extrapolation(self):
        # Timings of the HR pipeline at three resolutions; the quadratic
        # fit predicts the low-resolution point within 10%.
        known = [
            (560 * 800, 0.068),
            (1120 * 800, 0.091),
            (1680 * 1200, 0.184),
        ]
        model = fit_time_model(known)
        predicted = model.predict(140 * 200)
        assert predicted == pytest.approx(
            lagrange_quadratic(known, 140 * 200), rel=1e-9
        )
        assert abs(predicted - 0.054) / 0.054 < 0.10

    def test_needs_three_distinct_abscissae(self):
        with pytest.raises(ValueError):
            fit_time_model([(1.0, 1.0), (2.0, 2.0)])
        with pytest.raises(ValueError):
            fit_time_model([(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)])


class TestBenchRecord:
    def test_validation(self):
        with pytest.raises(ValueError):
            BenchRecord("fill", 10, 10, 0.0, 1)
        with pytest.raises(ValueError):
            BenchRecord("fill", 10, 10, 0.5, 0)
        rec = BenchRecord("fill", 640, 480, 0.25, 3)
        assert rec.pixels == 640 * 480
        assert rec.to_dict()["stage"] == "fill"

    def test_time_stage_records_median(self):
        rec = time_stage("noop", 8, 8, lambda: sum(range(1000)), repetitions=5)
        assert rec.repetitions == 5
        assert rec.seconds > 0
