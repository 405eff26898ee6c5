"""Polygon fill, star geometry, and supersampled rendering."""

import math

import numpy as np
import pytest

from favbot.raster import (
    STAR_INNER_RATIO,
    _fill_polygon_loops,
    _fill_polygon_numpy,
    downsample_mean,
    fill_polygon,
    rasterize_star,
    star_vertices,
)


def shoelace_area(xs, ys):
    n = len(xs)
    acc = 0.0
    for i in range(n):
        j = (i + 1) % n
        acc += xs[i] * ys[j] - xs[j] * ys[i]
    return abs(acc) / 2


class TestFillPolygon:
    def test_axis_aligned_square(self):
        xs = np.array([0.0, 2.0, 2.0, 0.0])
        ys = np.array([0.0, 0.0, 1.0, 1.0])
        img = fill_polygon(xs, ys, 3, 2)
        expect = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
        assert np.array_equal(img, expect)

    def test_triangle_half_coverage(self):
        # Right triangle over the unit square's lower-left half.
        n = 64
        xs = np.array([0.0, n, 0.0], dtype=float)
        ys = np.array([0.0, 0.0, n], dtype=float)
        img = fill_polygon(xs, ys, n, n)
        assert img.sum() == pytest.approx(n * n / 2, rel=0.02)

    def test_polygon_outside_grid_is_black(self):
        xs = np.array([100.0, 110.0, 105.0])
        ys = np.array([100.0, 100.0, 110.0])
        assert fill_polygon(xs, ys, 40, 30).sum() == 0.0

    def test_star_fill_area_matches_shoelace(self):
        xs, ys = star_vertices(80.0, 60.0, 50.0, 0.3)
        img = fill_polygon(xs, ys, 160, 120)
        assert img.sum() == pytest.approx(shoelace_area(xs, ys), rel=0.02)

    def test_star_core_is_filled(self):
        # Even-odd fill over the outline decagon covers the pentagon core.
        xs, ys = star_vertices(20.0, 15.0, 12.0, 0.0)
        img = fill_polygon(xs, ys, 40, 30)
        assert img[15, 20] == 1.0

    def test_backends_agree_bitwise(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            n = rng.integers(3, 12)
            xs = rng.uniform(-20, 180, n)
            ys = rng.uniform(-20, 140, n)
            a = _fill_polygon_loops(xs, ys, 160, 120)
            b = _fill_polygon_numpy(xs, ys, 160, 120)
            assert np.array_equal(a, b)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            fill_polygon(np.array([0.0, 1.0]), np.array([0.0, 1.0]), 4, 4)
        with pytest.raises(ValueError):
            fill_polygon(np.array([0.0, 1.0, math.nan]), np.zeros(3), 4, 4)
        with pytest.raises(ValueError):
            fill_polygon(np.zeros(3), np.zeros(3), 0, 4)


class TestStarVertices:
    def test_first_spike_points_up(self):
        xs, ys = star_vertices(10.0, 10.0, 4.0, 0.0)
        assert xs[0] == pytest.approx(10.0)
        assert ys[0] == pytest.approx(6.0)  # screen y grows downward

    def test_alternating_radii(self):
        xs, ys = star_vertices(0.0, 0.0, 1.0, 0.7)
        r = np.hypot(xs, ys)
        assert r[::2] == pytest.approx(1.0)
        assert r[1::2] == pytest.approx(STAR_INNER_RATIO)

    def test_rotation_moves_vertices(self):
        a = star_vertices(0.0, 0.0, 1.0, 0.0)
        b = star_vertices(0.0, 0.0, 1.0, 0.5)
        assert not np.allclose(a[0], b[0])

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(ValueError):
            star_vertices(0, 0, 0.0, 0.0)


class TestDownsample:
    def test_exact_block_means(self):
        img = np.zeros((4, 8))
        img[:2, :4] = 1.0  # top-left output pixel fully covered
        img[2, 4] = 1.0  # one superpixel in bottom-right block
        out = downsample_mean(img, 4)
        assert out.shape == (1, 2)
        assert out[0, 0] == 0.5
        assert out[0, 1] == 1 / 16

    def test_rejects_nondivisible(self):
        with pytest.raises(ValueError):
            downsample_mean(np.zeros((30, 41)), 4)


class TestRasterizeStar:
    def test_output_shape_and_range(self):
        img = rasterize_star(20.0, 15.0, 8.0, 0.0, 40, 30)
        assert img.shape == (30, 40)
        assert img.min() >= 0.0 and img.max() <= 1.0
        assert 0.0 < img.mean() < 1.0

    def test_antialiased_edges_exist(self):
        img = rasterize_star(20.0, 15.0, 8.0, 0.2, 40, 30)
        frac = (img > 0) & (img < 1)
        assert frac.any()

    def test_supersampling_converges_to_polygon_area(self):
        xs, ys = star_vertices(20.0, 15.0, 10.0, 0.1)
        area = shoelace_area(xs, ys)
        img = rasterize_star(20.0, 15.0, 10.0, 0.1, 40, 30, supersample=8)
        assert img.sum() == pytest.approx(area, rel=0.01)

    def test_deterministic(self):
        a = rasterize_star(17.3, 12.1, 6.4, 1.1, 40, 30)
        b = rasterize_star(17.3, 12.1, 6.4, 1.1, 40, 30)
        assert np.array_equal(a, b)
