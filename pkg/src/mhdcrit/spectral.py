"""Fourier analysis on the periodic box.

Coefficients use the real-to-complex layout of ``scipy.fft.rfftn``: the
x and y axes hold all integer wavenumbers ``-n/2 .. n/2-1`` in FFT order,
the z axis only ``0 .. nz/2``. The forward transform carries the 1/Npts
factor, so a coefficient is the amplitude of its Fourier mode and
Parseval reads ``||f||_2^2 = vol * sum_k |c_k|^2`` over the full lattice.

Any even size >= 4 is supported (pocketfft handles arbitrary lengths).
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .errors import NotSolenoidal, UnsupportedGrid
from .grid import AXES, Grid

SOLENOIDAL_TOL = 1e-8


class Spectral:
    """Wavenumber tables and transforms for one grid. Immutable once built."""

    def __init__(self, grid: Grid):
        nx, ny, nz = grid.n
        if any(v % 2 for v in grid.n):
            raise UnsupportedGrid(f"odd grid sizes are not supported: {grid.n}")
        self.grid = grid
        self.scale = 2 * np.pi / grid.length
        mx = np.fft.fftfreq(nx, 1.0 / nx)
        my = np.fft.fftfreq(ny, 1.0 / ny)
        mz = np.fft.rfftfreq(nz, 1.0 / nz)
        # integer wavenumbers, broadcastable against the (nx, ny, nz//2+1) layout
        self.m = (mx[:, None, None], my[None, :, None], mz[None, None, :])
        self.k = tuple(self.scale * m for m in self.m)
        self.k2 = self.k[0] ** 2 + self.k[1] ** 2 + self.k[2] ** 2
        self.spec_shape = (nx, ny, nz // 2 + 1)

        nyq = [np.abs(m) == n // 2 for m, n in zip(self.m, grid.n)]
        self.not_nyquist = ~(nyq[0] | nyq[1] | nyq[2])
        # derivative wavenumbers: the Nyquist plane of the differentiated axis is dropped
        self.kd = tuple(np.where(q, 0.0, k) for q, k in zip(nyq, self.k))

        self.dealias_mask = (
            (3 * np.abs(self.m[0]) <= nx) & (3 * np.abs(self.m[1]) <= ny) & (3 * np.abs(self.m[2]) <= nz)
        )
        # i k_j with the dealias mask folded in, for conservative nonlinear terms
        self.ikd_dealiased = tuple(1j * kd * self.dealias_mask for kd in self.kd)
        self.ikd = tuple(np.broadcast_to(1j * kd, self.spec_shape) for kd in self.kd)
        # compact block of the modes kept by the two-thirds rule
        self.keep = tuple(np.flatnonzero(3 * np.abs(m.ravel()) <= n) for m, n in zip(self.m, grid.n))
        S = self.spec_shape
        kx, ky, kz = self.keep
        self._keep_flat = (kx[:, None, None] * (S[1] * S[2]) + ky[None, :, None] * S[2] + kz[None, None, :]).ravel()
        self.compact_shape = (len(kx), len(ky), len(kz))
        self.kd_c = tuple(np.take(kd, idx, axis=a) for a, (kd, idx) in enumerate(zip(self.kd, self.keep)))
        inv = np.zeros(np.broadcast_shapes(*(k.shape for k in self.k)))
        np.divide(1.0, self.k2, out=inv, where=self.k2 > 0)
        self.inv_k2 = inv
        kmag = np.sqrt(inv)
        self.khat = tuple(np.ascontiguousarray(np.broadcast_to(k * kmag, self.spec_shape)) for k in self.k)
        self.khat_c = tuple(self.compact(h) for h in self.khat)
        # rfft storage holds each interior z-mode once for the pair (k, -k)
        w = np.full(nz // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        self.herm_weight = w[None, None, :]

    # transforms -----------------------------------------------------------
    def forward(self, f: np.ndarray) -> np.ndarray:
        self.grid.check(f)
        return sfft.rfftn(f, axes=(-3, -2, -1), norm="forward")

    def inverse(self, F: np.ndarray) -> np.ndarray:
        return sfft.irfftn(F, s=self.grid.n, axes=(-3, -2, -1), norm="forward")

    # spectral-space operators --------------------------------------------
    def sum_sq(self, F: np.ndarray) -> float:
        """vol * sum over the full lattice of |F|^2 (= ||f||_2^2 by Parseval)."""
        a = np.abs(F) ** 2 * self.herm_weight
        return float(np.sum(a)) * self.grid.volume

    def ddx(self, F: np.ndarray, axis: int) -> np.ndarray:
        return 1j * self.kd[axis] * F

    def grad_hat(self, F: np.ndarray) -> np.ndarray:
        """Spectral gradient; for vector input returns ``G[i, j] = d_j F_i``."""
        return np.stack([1j * self.kd[j] * F for j in range(3)], axis=F.ndim - 3)

    def div_hat(self, U: np.ndarray) -> np.ndarray:
        return 1j * (self.kd[0] * U[0] + self.kd[1] * U[1] + self.kd[2] * U[2])

    def lap_hat(self, F: np.ndarray) -> np.ndarray:
        return -self.k2 * F

    def compact(self, F: np.ndarray) -> np.ndarray:
        """Copy of the dealiased block of ``F`` (trailing three axes)."""
        lead = F.shape[:-3]
        return np.take(F.reshape(lead + (-1,)), self._keep_flat, axis=-1).reshape(lead + self.compact_shape)

    def expand(self, C: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`compact`, zero outside the block."""
        lead = C.shape[:-3]
        out = np.zeros(lead + (math.prod(self.spec_shape),), dtype=C.dtype)
        out[..., self._keep_flat] = C.reshape(lead + (-1,))
        return out.reshape(lead + self.spec_shape)

    def leray_hat(self, U: np.ndarray, nyquist: bool = True, inplace: bool = False,
                  khat: tuple | None = None) -> np.ndarray:
        """Remove the longitudinal part of ``U`` (components on axis -4).

        Nyquist planes are zeroed unless ``nyquist`` is False, which callers
        use when the input is already free of them. ``khat`` overrides the
        unit wavevectors (used on the compact block).
        """
        if nyquist:
            U = U * self.not_nyquist
        elif not inplace:
            U = U.copy()
        h0, h1, h2 = self.khat if khat is None else khat
        u0, u1, u2 = U[..., 0, :, :, :], U[..., 1, :, :, :], U[..., 2, :, :, :]
        d = h0 * u0
        d += h1 * u1
        d += h2 * u2
        u0 -= h0 * d
        u1 -= h1 * d
        u2 -= h2 * d
        return U

    def dealias_hat(self, F: np.ndarray) -> np.ndarray:
        return F * self.dealias_mask

    def max_divergence_hat(self, U: np.ndarray) -> float:
        """Largest mode amplitude of the spectral divergence."""
        return float(np.max(np.abs(self.div_hat(U)))) if U.size else 0.0

    def pressure_hat(self, Wm: np.ndarray, Wp: np.ndarray, dealias: bool = True,
                     wm: np.ndarray | None = None, wp: np.ndarray | None = None) -> np.ndarray:
        """Solve ``lap p = -d_i d_j (wm_j wp_i)`` from spectral inputs.

        Physical copies ``wm``/``wp`` may be passed to skip two inverse
        transforms. The gauge is zero mean.
        """
        wm = self.inverse(Wm) if wm is None else wm
        wp = self.inverse(Wp) if wp is None else wp
        F = self.forward((wm[None, :] * wp[:, None]).reshape((9,) + self.grid.n))
        F = F.reshape((3, 3) + self.spec_shape)
        if dealias:
            F = F * self.dealias_mask
        k = self.k
        acc = sum(k[i] * k[j] * F[i, j] for i in range(3) for j in range(3))
        return -acc * self.inv_k2 * self.not_nyquist

    def is_solenoidal(self, U: np.ndarray, tol: float = SOLENOIDAL_TOL) -> bool:
        div = self.sum_sq(self.div_hat(U))
        grad = sum(self.sum_sq(self.ddx(U[i], j)) for i in range(3) for j in range(3))
        return div <= tol**2 * grad


@lru_cache(maxsize=16)
def spectral(grid: Grid) -> Spectral:
    """Shared operator tables for ``grid``."""
    return Spectral(grid)


# physical-space convenience API -------------------------------------------

def dft_forward(f: np.ndarray, grid: Grid) -> np.ndarray:
    return spectral(grid).forward(f)


def dft_inverse(F: np.ndarray, grid: Grid) -> np.ndarray:
    return spectral(grid).inverse(F)


def derivative(f: np.ndarray, axis, grid: Grid) -> np.ndarray:
    """Spectral partial derivative along ``axis`` ('x', 'y', 'z' or 0-2)."""
    ax = AXES.get(axis, axis)
    sp = spectral(grid)
    return sp.inverse(sp.ddx(sp.forward(f), ax))


def gradient(u: np.ndarray, grid: Grid) -> np.ndarray:
    sp = spectral(grid)
    return sp.inverse(sp.grad_hat(sp.forward(u)))


def divergence(u: np.ndarray, grid: Grid) -> np.ndarray:
    sp = spectral(grid)
    return sp.inverse(sp.div_hat(sp.forward(u)))


def laplacian(f: np.ndarray, grid: Grid) -> np.ndarray:
    sp = spectral(grid)
    return sp.inverse(sp.lap_hat(sp.forward(f)))


def leray_project(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Orthogonal projection onto divergence-free fields.

    The mean is kept; Nyquist planes are dropped since their wavevector
    has no well-defined sign.
    """
    sp = spectral(grid)
    return sp.inverse(sp.leray_hat(sp.forward(u)))


def dealias_23(F: np.ndarray, grid: Grid) -> np.ndarray:
    """Two-thirds rule: zero coefficients with ``|m_i| > n_i/3`` on any axis."""
    return spectral(grid).dealias_hat(F)


def pressure_solve(w_minus: np.ndarray, w_plus: np.ndarray, grid: Grid,
                   dealias: bool = True) -> np.ndarray:
    """Pressure of the Elsasser system, ``lap p = -div(w_minus . grad w_plus)``."""
    sp = spectral(grid)
    grid.check(w_minus, w_plus)
    Wm, Wp = sp.forward(w_minus), sp.forward(w_plus)
    for name, W in (("w_minus", Wm), ("w_plus", Wp)):
        if not sp.is_solenoidal(W):
            raise NotSolenoidal(f"{name} is not divergence-free")
    return sp.inverse(sp.pressure_hat(Wm, Wp, dealias, w_minus, w_plus))
