import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kerrkitten.errors import UnderResolvedGrid
from kerrkitten.quad_engine import (
    PhaseSpaceGrid,
    grid_sum,
    integrate_1d,
    integrate_2d,
    map_points,
    simpson_weights,
)


def gaussian(z):
    return np.exp(-np.abs(z) ** 2) / math.pi


class TestGrid:
    def test_geometry(self):
        g = PhaseSpaceGrid(2.0, 4)
        assert g.step == 1.0 and g.cell_area == 1.0
        np.testing.assert_array_equal(g.axis, [-1.5, -0.5, 0.5, 1.5])
        pts = g.points()
        assert pts.shape == (4, 4) and pts[0, 3] == 1.5 - 1.5j
        assert g.boundary_mask().sum() == 12
        assert g.refined().points_per_axis == 8

    def test_validation(self):
        with pytest.raises(ValueError):
            PhaseSpaceGrid(0.0, 10)
        with pytest.raises(ValueError):
            PhaseSpaceGrid(1.0, 1)

    def test_centre_shift(self):
        g = PhaseSpaceGrid(1.0, 3, center=2 + 1j)
        assert g.points()[1, 1] == 2 + 1j


class TestIntegration:
    def test_gaussian_2d(self):
        res = integrate_2d(gaussian, PhaseSpaceGrid(7.0, 101))
        assert res.value == pytest.approx(1.0, abs=1e-12)
        assert res.error_estimate < 1e-12
        assert res.grid_meta["points_per_axis"] == 202

    def test_under_resolved_raises(self):
        with pytest.raises(UnderResolvedGrid):
            integrate_2d(lambda z: np.cos(40 * z.real) ** 2, PhaseSpaceGrid(1.0, 5), tol=1e-6)

    def test_simpson_exact_for_cubics(self):
        res = integrate_1d(lambda x: 3 * x**3 - x**2 + 2, -1.0, 2.0, 5)
        assert res.value == pytest.approx(3 * (16 - 1) / 4 - (8 + 1) / 3 + 6, rel=1e-14)

    def test_1d_gaussian_and_rounding(self):
        res = integrate_1d(lambda x: np.exp(-x * x), -8.0, 8.0, 100)
        assert res.value == pytest.approx(math.sqrt(math.pi), rel=1e-13)
        assert res.grid_meta["nodes"] == 2 * 101 - 1

    def test_simpson_weights(self):
        w = simpson_weights(5, 0.5)
        np.testing.assert_allclose(w, np.array([1, 4, 2, 4, 1]) * 0.5 / 3)
        with pytest.raises(ValueError):
            simpson_weights(4, 0.1)
        with pytest.raises(ValueError):
            integrate_1d(np.sin, 1.0, 0.0)


class TestDeterminism:
    @given(st.integers(1, 6))
    def test_map_points_independent_of_workers(self, workers):
        pts = PhaseSpaceGrid(3.0, 97).points()
        ref = map_points(gaussian, pts, 1)
        assert np.array_equal(map_points(gaussian, pts, workers), ref)

    def test_pairwise_sum_accuracy(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(200_001) * 1e3
        assert grid_sum(x) == pytest.approx(math.fsum(x), abs=1e-8)
        assert grid_sum(np.ones(10), 0.5) == 5.0

    def test_empty(self):
        assert map_points(gaussian, np.empty((0,), complex)).shape == (0,)
