import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mhdcrit.dynamics import initial_data
from mhdcrit.errors import NotSolenoidal
from mhdcrit.grid import Grid, lp_norm
from mhdcrit.spectral import (dealias_23, derivative, dft_forward, dft_inverse, divergence,
                              gradient, laplacian, leray_project, pressure_solve, spectral)

from conftest import smooth_scalar


def random_vector(grid, seed):
    return np.stack([smooth_scalar(grid, seed + i) for i in range(3)])


class TestTransforms:
    @given(st.integers(0, 1000))
    def test_round_trip(self, seed):
        g = Grid((8, 6, 4))
        f = np.random.default_rng(seed).standard_normal(g.n)
        assert np.allclose(dft_inverse(dft_forward(f, g), g), f, atol=1e-13)

    def test_coefficients_are_amplitudes(self, grid16):
        x = grid16.mesh()[0]
        F = dft_forward(np.broadcast_to(np.cos(3 * x), grid16.n), grid16)
        assert F[3, 0, 0] == pytest.approx(0.5)
        assert F[-3, 0, 0] == pytest.approx(0.5)

    @given(st.integers(0, 100))
    def test_parseval(self, seed):
        g = Grid.cube(8)
        f = np.random.default_rng(seed).standard_normal(g.n)
        sp = spectral(g)
        assert sp.sum_sq(sp.forward(f)) == pytest.approx(lp_norm(f, 2, g) ** 2, rel=1e-12)


class TestDerivatives:
    def test_sine_derivatives(self):
        g = Grid.cube(16, 4.0)
        x, y, z = g.mesh()
        k = 2 * math.pi / 4.0
        f = np.sin(2 * k * x) * np.cos(k * z) + 0 * y
        assert np.allclose(derivative(f, "x", g), 2 * k * np.cos(2 * k * x) * np.cos(k * z), atol=1e-12)
        assert np.allclose(derivative(f, 2, g), -k * np.sin(2 * k * x) * np.sin(k * z), atol=1e-12)
        assert np.allclose(laplacian(f, g), -5 * k**2 * f, atol=1e-11)

    def test_nyquist_mode_has_zero_derivative(self):
        g = Grid.cube(8)
        x = g.mesh()[0]
        f = np.broadcast_to(np.cos(4 * x), g.n)
        assert np.abs(derivative(f, 0, g)).max() < 1e-14

    def test_gradient_layout(self, grid16):
        u = random_vector(grid16, 3)
        G = gradient(u, grid16)
        assert G.shape == (3, 3) + grid16.n
        assert np.allclose(G[1, 2], derivative(u[1], "z", grid16))
        assert np.allclose(divergence(u, grid16), G[0, 0] + G[1, 1] + G[2, 2], atol=1e-12)


class TestLeray:
    @given(st.integers(0, 200))
    def test_projection_is_solenoidal_and_idempotent(self, seed):
        g = Grid.cube(8)
        u = np.random.default_rng(seed).standard_normal((3,) + g.n)
        P = leray_project(u, g)
        assert np.abs(divergence(P, g)).max() < 1e-12
        assert np.allclose(leray_project(P, g), P, atol=1e-13)

    def test_keeps_mean_and_gradient_part_removed(self, grid16):
        x, y, z = grid16.mesh()
        phi = np.sin(x) * np.cos(2 * y) * np.sin(z)
        grad_phi = gradient(phi, grid16)
        u = grad_phi + 0.7
        P = leray_project(u, grid16)
        assert np.allclose(P, 0.7, atol=1e-13)

    def test_dealias_mask(self):
        g = Grid.cube(12)
        F = np.ones(spectral(g).spec_shape, dtype=complex)
        D = dealias_23(F, g)
        assert D[4, 0, 0] == 1 and D[5, 0, 0] == 0 and D[-4, 0, 0] == 1 and D[0, 0, 5] == 0


class TestPressure:
    def test_taylor_green(self, grid32):
        s = initial_data("taylor_green", {}, grid32)
        p = pressure_solve(s.u, s.u, grid32)
        x, y, _ = grid32.mesh()
        exact = np.broadcast_to(-0.25 * (np.cos(2 * x) + np.cos(2 * y)), grid32.n)
        assert lp_norm(p - exact, 2, grid32) < 1e-12

    def test_rejects_compressible_input(self, grid16):
        x = grid16.mesh()[0]
        w = np.zeros((3,) + grid16.n)
        w[0] = np.sin(x)
        with pytest.raises(NotSolenoidal):
            pressure_solve(w, w, grid16)

    def test_zero_mean_gauge(self, grid16):
        s = initial_data("random_bandlimited", {"k_max": 3}, grid16, seed=4)
        p = pressure_solve(s.u - s.b, s.u + s.b, grid16)
        assert abs(p.mean()) < 1e-14
