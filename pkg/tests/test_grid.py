import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mhdcrit.errors import DegenerateInput, GridMismatch, InvalidExponent
from mhdcrit.grid import Grid, inner_product, integral, lp_norm, magnitude, vector_lp_norm

from conftest import smooth_scalar


class TestGrid:
    def test_scalar_size_makes_cube(self):
        g = Grid(8)
        assert g.n == (8, 8, 8)
        assert g.npts == 512
        assert g.volume == pytest.approx((2 * math.pi) ** 3)

    @pytest.mark.parametrize("n", [(3, 4, 4), (4, 4, 5), (2, 2, 2)])
    def test_rejects_odd_or_tiny(self, n):
        with pytest.raises(ValueError):
            Grid(n)

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            Grid(8, 0.0)

    def test_coords_are_uniform(self):
        g = Grid((4, 6, 8), 3.0)
        x, y, z = g.coords
        assert np.allclose(np.diff(y), 0.5)
        assert z[-1] == pytest.approx(3.0 - 3.0 / 8)

    def test_check_mismatch(self, grid16):
        with pytest.raises(GridMismatch):
            grid16.check(np.zeros((8, 8, 8)))


class TestNorms:
    def test_constant_one(self, grid16):
        f = np.ones(grid16.n)
        for p in (1, 2, 3.5, 10):
            assert lp_norm(f, p, grid16) == pytest.approx(grid16.volume ** (1 / p), rel=1e-14)
        assert lp_norm(f, math.inf, grid16) == 1.0

    def test_cos_l2_exact(self, grid16):
        z = grid16.mesh()[2]
        f = np.broadcast_to(np.cos(z), grid16.n)
        assert lp_norm(f, 2, grid16) == pytest.approx(2 * math.pi * math.sqrt(math.pi), rel=1e-14)

    def test_invalid_exponent(self, grid16):
        with pytest.raises(InvalidExponent):
            lp_norm(np.ones(grid16.n), 0.5, grid16)
        with pytest.raises(InvalidExponent):
            lp_norm(np.ones(grid16.n), math.nan, grid16)

    def test_nonfinite(self, grid16):
        f = np.ones(grid16.n)
        f[0, 0, 0] = np.nan
        with pytest.raises(DegenerateInput):
            lp_norm(f, 2, grid16)

    def test_zero_field(self, grid16):
        assert lp_norm(np.zeros(grid16.n), 4, grid16) == 0.0

    def test_large_exponent_no_overflow(self, grid16):
        f = 1e200 * smooth_scalar(grid16, 1)
        assert math.isfinite(lp_norm(f, 50, grid16))

    def test_vector_norm_uses_euclidean_magnitude(self, grid16):
        u = np.zeros((3,) + grid16.n)
        u[0], u[1] = 3.0, 4.0
        assert np.allclose(magnitude(u), 5.0)
        assert vector_lp_norm(u, 2, grid16) == pytest.approx(5 * grid16.volume ** 0.5)

    @given(st.floats(1, 20), st.floats(1e-6, 1e6), st.integers(0, 50))
    def test_homogeneity(self, p, c, seed):
        g = Grid.cube(8)
        f = smooth_scalar(g, seed)
        assert lp_norm(c * f, p, g) == pytest.approx(c * lp_norm(f, p, g), rel=1e-12)

    @given(st.floats(1.01, 10), st.integers(0, 50))
    def test_discrete_holder(self, p, seed):
        g = Grid.cube(8)
        f, h = smooth_scalar(g, seed), smooth_scalar(g, seed + 100)
        q = p / (p - 1)
        lhs = abs(integral(f * h, g))
        assert lhs <= lp_norm(f, p, g) * lp_norm(h, q, g) * (1 + 1e-12)

    @given(st.floats(1, 8), st.floats(1, 8), st.integers(0, 50))
    def test_norm_monotone_on_unit_volume_box(self, p, q, seed):
        g = Grid.cube(8, 1.0)
        f = smooth_scalar(g, seed)
        lo, hi = sorted((p, q))
        assert lp_norm(f, lo, g) <= lp_norm(f, hi, g) * (1 + 1e-12)


class TestQuadrature:
    def test_integral_and_inner(self, grid16):
        x = grid16.mesh()[0]
        f = np.broadcast_to(np.sin(x) ** 2, grid16.n)
        assert integral(f, grid16) == pytest.approx(4 * math.pi**3, rel=1e-14)
        assert inner_product(f, f, grid16) == pytest.approx(integral(f * f, grid16))

    def test_inner_shape_mismatch(self, grid16):
        with pytest.raises(GridMismatch):
            inner_product(np.zeros((3,) + grid16.n), np.zeros(grid16.n), grid16)
