import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccdmeasure.heatmap import (
    ALL_CHANNEL_NAMES,
    ChannelName,
    ChannelRaster,
    Heatmap,
    EmptyCloudError,
    HeatmapError,
    PointCloud,
    Side,
    Structure,
    centroid,
    decode_raster,
    encode_raster,
    heatmap_mse,
    load_heatmap,
    quantize,
    threshold_points,
    write_manifest,
)
from ccdmeasure.synth import render_line_heatmap, segment_distance


def make_channel(values, name=ChannelName(Side.LEFT, Structure.NECK_CENTERLINE)):
    return ChannelRaster(name, np.asarray(values, dtype=float))


class TestChannelName:
    def test_twelve_valid_combinations(self):
        assert len(ALL_CHANNEL_NAMES) == 12
        assert len({str(n) for n in ALL_CHANNEL_NAMES}) == 12

    def test_canonical_string_round_trip(self):
        name = ChannelName(Side.LEFT, Structure.NECK_CENTERLINE)
        assert str(name) == "Femoral Neck Centerline Left"
        assert ChannelName.parse(str(name)) == name

    def test_unknown_label_rejected(self):
        with pytest.raises(HeatmapError):
            ChannelName.parse("Femoral Head Left")


class TestHeatmapInvariants:
    def test_values_outside_unit_interval_rejected(self):
        with pytest.raises(HeatmapError):
            make_channel([[0.5, 1.2]])

    def test_dimension_mismatch_rejected(self):
        a = make_channel(np.zeros((4, 4)))
        b = ChannelRaster(
            ChannelName(Side.RIGHT, Structure.SHAFT_CENTERLINE), np.zeros((5, 4))
        )
        with pytest.raises(HeatmapError):
            Heatmap((a, b))

    def test_duplicate_names_rejected(self):
        a = make_channel(np.zeros((4, 4)))
        with pytest.raises(HeatmapError):
            Heatmap((a, a))


class TestManifestIO:
    def make_heatmap(self, size=32):
        rng = np.random.default_rng(7)
        channels = tuple(
            ChannelRaster(name, rng.uniform(0, 1, (size, size)))
            for name in ALL_CHANNEL_NAMES
        )
        return Heatmap(channels)

    def test_round_trip_is_quantization_fixed_point(self, tmp_path):
        hm = self.make_heatmap()
        manifest = write_manifest(tmp_path, hm)
        loaded = load_heatmap(manifest)
        assert loaded.width == loaded.height == 32
        assert len(loaded.channels) == 12
        for orig, back in zip(hm.channels, loaded.channels):
            assert back.name == orig.name
            np.testing.assert_array_equal(back.values, quantize(orig.values))
        # a second round trip is value-identical: quantization is the fixed point
        manifest2 = write_manifest(tmp_path / "again", loaded)
        again = load_heatmap(manifest2)
        for a, b in zip(loaded.channels, again.channels):
            np.testing.assert_array_equal(a.values, b.values)

    def test_encoding_endpoints(self, tmp_path):
        path = tmp_path / "c.png"
        encode_raster(np.array([[0.0, 1.0]]), path)
        np.testing.assert_array_equal(decode_raster(path), [[0.0, 1.0]])

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(HeatmapError, match="not found"):
            load_heatmap(tmp_path / "nope.json")

    def test_malformed_manifest(self, tmp_path):
        p = tmp_path / "manifest.json"
        p.write_text("{not json")
        with pytest.raises(HeatmapError, match="malformed"):
            load_heatmap(p)

    def test_raster_dimension_mismatch(self, tmp_path):
        encode_raster(np.zeros((8, 8)), tmp_path / "a.png")
        encode_raster(np.zeros((9, 8)), tmp_path / "b.png")
        manifest = {
            "version": 1, "width": 8, "height": 8, "image": None,
            "channels": [
                {"name": "Femoral Neck Centerline Left", "file": "a.png", "side": "left"},
                {"name": "Femoral Shaft Centerline Left", "file": "b.png", "side": "left"},
            ],
        }
        p = tmp_path / "manifest.json"
        p.write_text(json.dumps(manifest))
        with pytest.raises(HeatmapError, match="manifest says"):
            load_heatmap(p)

    def test_unknown_channel_name(self, tmp_path):
        encode_raster(np.zeros((8, 8)), tmp_path / "a.png")
        p = tmp_path / "manifest.json"
        p.write_text(json.dumps({
            "version": 1, "width": 8, "height": 8,
            "channels": [{"name": "Mystery Line", "file": "a.png"}],
        }))
        with pytest.raises(HeatmapError, match="unknown channel"):
            load_heatmap(p)


class TestThresholdPoints:
    def test_strict_cutoff_keeps_only_above(self):
        values = np.zeros((10, 10))
        values[5, 5] = 0.95
        values[9, 9] = 0.50
        values[3, 3] = 0.90  # exactly at the cutoff: removed
        cloud = threshold_points(make_channel(values), 0.9)
        assert len(cloud) == 1
        assert tuple(cloud.xy[0]) == (5.0, 5.0)
        assert cloud.weights[0] == 0.95

    def test_all_zero_channel_gives_empty_cloud(self):
        cloud = threshold_points(make_channel(np.zeros((6, 6))), 0.9)
        assert len(cloud) == 0

    def test_row_major_order(self):
        values = np.zeros((4, 4))
        values[2, 1] = values[0, 3] = values[2, 0] = 1.0
        cloud = threshold_points(make_channel(values), 0.5)
        assert [tuple(p) for p in cloud.xy] == [(3.0, 0.0), (0.0, 2.0), (1.0, 2.0)]

    def test_gaussian_band_width_matches_closed_form(self):
        # every surviving pixel lies within sigma*sqrt(-2 ln cutoff) of the
        # segment; oracle is brute-force distance over all pixels
        sigma, cutoff = 3.0, 0.9
        segment = ((20.0, 10.0), (40.0, 70.0))
        values = render_line_heatmap(segment, sigma, 80, 80)
        cloud = threshold_points(make_channel(values), cutoff)
        assert len(cloud) > 0
        limit = sigma * math.sqrt(-2.0 * math.log(cutoff))
        d = segment_distance(cloud.xy[:, 0], cloud.xy[:, 1], segment)
        assert (d <= limit + 1e-12).all()
        # and brute force over the whole raster agrees on the survivor set
        px, py = np.meshgrid(np.arange(80.0), np.arange(80.0))
        brute = segment_distance(px, py, segment)
        expected = int((np.exp(-brute**2 / (2 * sigma**2)) > cutoff).sum())
        assert len(cloud) == expected

    @given(
        st.integers(0, 2**32 - 1),
        st.floats(0.0, 0.99),
        st.floats(0.0, 0.99),
    )
    @settings(max_examples=50, deadline=None)
    def test_monotone_in_cutoff(self, seed, t1, t2):
        t1, t2 = sorted((t1, t2))
        values = np.random.default_rng(seed).uniform(0, 1, (12, 12))
        ch = make_channel(values)
        loose = {tuple(p) for p in threshold_points(ch, t1).xy}
        tight = {tuple(p) for p in threshold_points(ch, t2).xy}
        assert tight <= loose

    def test_invalid_cutoff(self):
        with pytest.raises(ValueError):
            threshold_points(make_channel(np.zeros((2, 2))), 1.0)


class TestCentroid:
    def test_two_points(self):
        assert centroid(PointCloud([(0, 0), (2, 2)])) == (1.0, 1.0)

    def test_single_point_identity(self):
        assert centroid(PointCloud([(7, 3)])) == (7.0, 3.0)

    def test_empty_cloud(self):
        with pytest.raises(EmptyCloudError):
            centroid(PointCloud(np.empty((0, 2))))

    def test_symmetric_segment_centroid_near_midpoint(self):
        # oracle: brute-force mean over the rendered pixel set
        segment = ((30.0, 20.0), (30.0, 80.0))
        values = render_line_heatmap(segment, 3.0, 100, 100)
        cloud = threshold_points(make_channel(values), 0.9)
        cx, cy = centroid(cloud)
        assert math.hypot(cx - 30.0, cy - 50.0) < 0.5
        np.testing.assert_allclose((cx, cy), cloud.xy.mean(axis=0))

    @given(st.integers(0, 2**32 - 1), st.floats(-50, 50), st.floats(-50, 50))
    @settings(max_examples=50, deadline=None)
    def test_translation_equivariance(self, seed, dx, dy):
        rng = np.random.default_rng(seed)
        xy = rng.uniform(0, 100, (20, 2))
        cx, cy = centroid(PointCloud(xy))
        sx, sy = centroid(PointCloud(xy + [dx, dy]))
        assert math.isclose(sx, cx + dx, abs_tol=1e-9)
        assert math.isclose(sy, cy + dy, abs_tol=1e-9)


class TestHeatmapMse:
    def test_identical_rasters(self):
        a = make_channel(np.full((3, 3), 0.4))
        assert heatmap_mse(a, a) == 0.0

    def test_zeros_vs_ones(self):
        a = make_channel(np.zeros((5, 5)))
        b = make_channel(np.ones((5, 5)))
        assert heatmap_mse(a, b) == 1.0

    def test_hand_arithmetic(self):
        a = make_channel([[0.0, 0.5]])
        b = make_channel([[0.0, 0.0]])
        assert heatmap_mse(a, b) == 0.125

    def test_dimension_mismatch(self):
        with pytest.raises(HeatmapError):
            heatmap_mse(make_channel(np.zeros((2, 2))), make_channel(np.zeros((3, 2))))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_symmetric_and_zero_iff_equal(self, seed):
        rng = np.random.default_rng(seed)
        a = make_channel(rng.uniform(0, 1, (6, 6)))
        b = make_channel(rng.uniform(0, 1, (6, 6)))
        assert heatmap_mse(a, b) == heatmap_mse(b, a)
        assert heatmap_mse(a, a) == 0.0
        if not np.array_equal(a.values, b.values):
            assert heatmap_mse(a, b) > 0.0
