"""File format round trips and malformed-input handling."""

import json
import struct

import numpy as np
import pytest
from PIL import Image

from depthsr import io as dio
from depthsr.core import (
    CameraIntrinsics,
    DefinitionMap,
    DepthMap,
    IntensityMap,
    ObjectMap,
    Sample,
)
from depthsr.geom import PointCloud


def random_depth(rng, h, w, hole_frac=0.3) -> DepthMap:
    data = rng.uniform(10.0, 2000.0, size=(h, w)).astype(np.float32)
    data[rng.random((h, w)) < hole_frac] = np.nan
    return DepthMap(data)


def quantized_intensity(rng, h, w) -> IntensityMap:
    raw = rng.integers(0, 65536, size=(h, w), dtype=np.uint16)
    return IntensityMap((raw.astype(np.float64) / 65535.0).astype(np.float32))


class TestPfm:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        d = random_depth(rng, 13, 7)
        path = tmp_path / "d.pfm"
        dio.write_pfm(path, d)
        back = dio.read_pfm(path)
        nan_a, nan_b = np.isnan(d.data), np.isnan(back.data)
        assert (nan_a == nan_b).all()
        assert (d.data[~nan_a] == back.data[~nan_b]).all()

    def test_undefined_serialized_as_zero(self, tmp_path):
        d = DepthMap(np.array([[np.nan, 500.0]], dtype=np.float32))
        path = tmp_path / "d.pfm"
        dio.write_pfm(path, d)
        payload = path.read_bytes().split(b"-1.0\n", 1)[1]
        values = struct.unpack("<2f", payload)
        assert values == (0.0, 500.0)

    def test_rejects_negative_values(self, tmp_path):
        path = tmp_path / "bad.pfm"
        with open(path, "wb") as f:
            f.write(b"Pf\n2 1\n-1.0\n")
            f.write(struct.pack("<2f", -5.0, 100.0))
        with pytest.raises(ValueError, match="negative"):
            dio.read_pfm(path)

    def test_rejects_nan_payload(self, tmp_path):
        path = tmp_path / "bad.pfm"
        with open(path, "wb") as f:
            f.write(b"Pf\n2 1\n-1.0\n")
            f.write(struct.pack("<2f", float("nan"), 100.0))
        with pytest.raises(ValueError, match="non-finite"):
            dio.read_pfm(path)

    def test_rejects_color_pfm(self, tmp_path):
        path = tmp_path / "bad.pfm"
        path.write_bytes(b"PF\n1 1\n-1.0\n" + b"\x00" * 12)
        with pytest.raises(ValueError, match="not a grayscale"):
            dio.read_pfm(path)

    def test_rejects_bad_scale(self, tmp_path):
        path = tmp_path / "bad.pfm"
        path.write_bytes(b"Pf\n1 1\n-2.5\n" + struct.pack("<f", 1.0))
        with pytest.raises(ValueError, match="scale"):
            dio.read_pfm(path)

    def test_rejects_truncated_payload(self, tmp_path):
        path = tmp_path / "bad.pfm"
        path.write_bytes(b"Pf\n2 2\n-1.0\n" + struct.pack("<f", 1.0))
        with pytest.raises(ValueError, match="truncated"):
            dio.read_pfm(path)

    def test_big_endian_scale_supported(self, tmp_path):
        path = tmp_path / "be.pfm"
        with open(path, "wb") as f:
            f.write(b"Pf\n1 1\n1.0\n")
            f.write(struct.pack(">f", 321.5))
        assert dio.read_pfm(path).data[0, 0] == np.float32(321.5)

    def test_error_mentions_path(self, tmp_path):
        path = tmp_path / "named.pfm"
        path.write_bytes(b"nope\n")
        with pytest.raises(ValueError, match="named.pfm"):
            dio.read_pfm(path)


class TestPng:
    def test_intensity_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        m = quantized_intensity(rng, 9, 11)
        path = tmp_path / "i.png"
        dio.write_intensity_png(path, m)
        back = dio.read_intensity_png(path)
        assert (m.data == back.data).all()

    def test_8bit_intensity_scaled(self, tmp_path):
        path = tmp_path / "i8.png"
        Image.fromarray(np.array([[0, 255]], dtype=np.uint8), mode="L").save(path)
        m = dio.read_intensity_png(path)
        assert m.data[0, 0] == 0.0 and m.data[0, 1] == 1.0

    def test_mask_round_trip(self, tmp_path):
        mask = DefinitionMap(np.array([[1, 0], [0, 1]], dtype=np.uint8))
        path = tmp_path / "m.png"
        dio.write_definition_png(path, mask)
        assert (dio.read_definition_png(path).data == mask.data).all()

    def test_mask_rejects_gray_values(self, tmp_path):
        path = tmp_path / "m.png"
        Image.fromarray(np.array([[7, 255]], dtype=np.uint8), mode="L").save(path)
        with pytest.raises(ValueError, match="0 or 255"):
            dio.read_definition_png(path)


class TestMeta:
    def test_round_trip_exact(self, tmp_path):
        intr = CameraIntrinsics(fx=387.123456789, fy=400.0, cx=159.5, cy=119.5)
        path = tmp_path / "meta.json"
        dio.write_meta(path, intr, 4, {"kind": "box"})
        back_intr, scale, tags = dio.read_meta(path)
        assert back_intr == intr
        assert scale == 4
        assert tags == {"kind": "box"}

    def test_missing_key(self, tmp_path):
        path = tmp_path / "meta.json"
        path.write_text(json.dumps({"fx": 1.0}))
        with pytest.raises(ValueError, match="missing key"):
            dio.read_meta(path)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "meta.json"
        path.write_text("{nope")
        with pytest.raises(ValueError, match="meta.json"):
            dio.read_meta(path)


def make_sample(rng, h=8, w=12, scale=2) -> Sample:
    depth = random_depth(rng, h, w)
    definition = DefinitionMap(np.isfinite(depth.data).astype(np.uint8))
    obj = np.zeros((h, w), dtype=np.uint8)
    obj[2, 3] = definition.data[2, 3]
    return Sample(
        hr_depth=depth,
        intensity=quantized_intensity(rng, h, w),
        definition=definition,
        intrinsics=CameraIntrinsics(fx=50.0, fy=55.0, cx=5.5, cy=4.0),
        scale=scale,
        object_map=ObjectMap(obj),
        lr_depth=random_depth(rng, h // scale, w // scale, hole_frac=0.0),
        metadata={"origin": "test"},
    )


class TestSampleRoundTrip:
    def test_write_read_identity(self, tmp_path):
        rng = np.random.default_rng(7)
        s = make_sample(rng)
        dio.write_sample(s, tmp_path / "s")
        back = dio.read_sample(tmp_path / "s")
        for name in ("hr_depth", "lr_depth"):
            a = getattr(s, name).data
            b = getattr(back, name).data
            assert ((a == b) | (np.isnan(a) & np.isnan(b))).all(), name
        assert (s.intensity.data == back.intensity.data).all()
        assert (s.definition.data == back.definition.data).all()
        assert (s.object_map.data == back.object_map.data).all()
        assert s.intrinsics == back.intrinsics
        assert s.scale == back.scale
        assert s.metadata == back.metadata

    def test_optional_files_absent(self, tmp_path):
        rng = np.random.default_rng(9)
        s = make_sample(rng)
        s = Sample(
            hr_depth=s.hr_depth,
            intensity=s.intensity,
            definition=s.definition,
            intrinsics=s.intrinsics,
            scale=1,
        )
        dio.write_sample(s, tmp_path / "s")
        assert not (tmp_path / "s" / dio.OBJECT_FILE).exists()
        back = dio.read_sample(tmp_path / "s")
        assert back.object_map is None and back.lr_depth is None

    def test_missing_file_reported_with_path(self, tmp_path):
        rng = np.random.default_rng(13)
        dio.write_sample(make_sample(rng), tmp_path / "s")
        (tmp_path / "s" / dio.INTENSITY_FILE).unlink()
        with pytest.raises(FileNotFoundError, match="intensity.png"):
            dio.read_sample(tmp_path / "s")

    def test_dimension_mismatch_detected(self, tmp_path):
        rng = np.random.default_rng(15)
        dio.write_sample(make_sample(rng), tmp_path / "s")
        small = IntensityMap(np.full((2, 2), 0.5, dtype=np.float32))
        dio.write_intensity_png(tmp_path / "s" / dio.INTENSITY_FILE, small)
        with pytest.raises(ValueError, match="does not match"):
            dio.read_sample(tmp_path / "s")

    def test_invalid_depth_payload_detected(self, tmp_path):
        rng = np.random.default_rng(17)
        dio.write_sample(make_sample(rng), tmp_path / "s")
        path = tmp_path / "s" / dio.DEPTH_HR_FILE
        with open(path, "wb") as f:
            f.write(b"Pf\n1 1\n-1.0\n")
            f.write(struct.pack("<f", -3.0))
        with pytest.raises(ValueError, match="negative"):
            dio.read_sample(tmp_path / "s")


class TestPly:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(21)
        pts = rng.integers(-500, 500, size=(40, 3)).astype(np.float64)
        colors = rng.integers(0, 256, size=(40, 3)).astype(np.float64) / 255.0
        cloud = PointCloud(points=pts, colors=colors)
        path = tmp_path / "c.ply"
        dio.write_ply(path, cloud)
        back = dio.read_ply(path)
        assert (back.points == pts).all()
        assert np.abs(back.colors - colors).max() < 1e-12

    def test_no_color_round_trip(self, tmp_path):
        pts = np.array([[1.0, 2.0, 3.0]])
        path = tmp_path / "c.ply"
        dio.write_ply(path, PointCloud(points=pts))
        back = dio.read_ply(path)
        assert back.colors is None
        assert (back.points == pts).all()

    def test_header_is_binary_little_endian(self, tmp_path):
        path = tmp_path / "c.ply"
        dio.write_ply(path, PointCloud(points=np.zeros((1, 3)) + 1.0))
        head = path.read_bytes().split(b"end_header")[0]
        assert b"format binary_little_endian 1.0" in head
        assert b"property float x" in head


def test_distances_json(tmp_path):
    path = tmp_path / "d.json"
    dio.write_distances_json(path, np.array([0.0, 1.5, 2.25]))
    assert json.loads(path.read_text()) == [0.0, 1.5, 2.25]
