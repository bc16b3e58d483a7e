"""Periodic box geometry and quadrature.

Fields are plain numpy arrays in C order: a scalar field has shape
``(nx, ny, nz)`` (z fastest), a vector field ``(3, nx, ny, nz)`` and a
gradient tensor ``(3, 3, nx, ny, nz)`` with ``G[i, j] = d_j u_i``.

All integrals are uniform Riemann sums over the box, which coincide with
the periodic trapezoid rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateInput, GridMismatch, InvalidExponent

AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class Grid:
    """Cubic periodic box ``[0, length)^3`` sampled with ``n`` points per axis."""

    n: tuple[int, int, int]
    length: float = 2 * math.pi

    def __post_init__(self):
        n = tuple(int(v) for v in (self.n if np.ndim(self.n) else (self.n,) * 3))
        if len(n) != 3:
            raise ValueError(f"grid needs three sizes, got {n}")
        for v in n:
            if v < 4 or v % 2:
                raise ValueError(f"grid sizes must be even and >= 4, got {n}")
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ValueError(f"box length must be positive, got {self.length}")
        if n[0] * n[1] * n[2] > np.iinfo(np.intp).max // 8:
            raise ValueError(f"grid {n} too large to address")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", float(self.length))

    @classmethod
    def cube(cls, n: int, length: float = 2 * math.pi) -> "Grid":
        return cls((n, n, n), length)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.n

    @property
    def npts(self) -> int:
        return self.n[0] * self.n[1] * self.n[2]

    @property
    def spacing(self) -> tuple[float, float, float]:
        return tuple(self.length / v for v in self.n)

    @property
    def volume(self) -> float:
        return self.length**3

    @property
    def cell_volume(self) -> float:
        return self.volume / self.npts

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """1-D node coordinates per axis."""
        return tuple(np.arange(v) * (self.length / v) for v in self.n)

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable (sparse) coordinate arrays."""
        x, y, z = self.coords
        return x[:, None, None], y[None, :, None], z[None, None, :]

    def zeros(self, *lead: int) -> np.ndarray:
        return np.zeros(tuple(lead) + self.n)

    def check(self, *fields: np.ndarray) -> None:
        """Raise GridMismatch unless every field's trailing shape is this grid."""
        for f in fields:
            if np.shape(f)[-3:] != self.n:
                raise GridMismatch(f"field shape {np.shape(f)} does not match grid {self.n}")


def magnitude(f: np.ndarray) -> np.ndarray:
    """Pointwise Euclidean (vector) or Frobenius (tensor) magnitude."""
    f = np.asarray(f)
    if f.ndim == 3:
        return np.abs(f)
    flat = f.reshape((-1,) + f.shape[-3:])
    return np.sqrt(np.sum(flat * flat, axis=0))


def _check_exponent(p: float) -> float:
    p = float(p)
    if math.isnan(p) or p < 1:
        raise InvalidExponent(f"exponent must satisfy p >= 1 or p = inf, got {p}")
    return p


def lp_norm(f: np.ndarray, p: float, grid: Grid) -> float:
    """Discrete L^p norm of a scalar field, max |f| for ``p = inf``.

    The sum is rescaled by max |f| so large exponents neither overflow nor
    underflow; the result is homogeneous of degree one to roundoff.
    """
    p = _check_exponent(p)
    grid.check(f)
    a = np.abs(np.asarray(f, dtype=float))
    m = float(a.max())
    if not math.isfinite(m):
        raise DegenerateInput("field contains non-finite samples")
    if m == 0.0 or math.isinf(p):
        return m
    s = float(np.sum((a / m) ** p)) * grid.cell_volume
    return m * s ** (1.0 / p)


def vector_lp_norm(u: np.ndarray, p: float, grid: Grid) -> float:
    """L^p norm of the pointwise Euclidean/Frobenius magnitude of ``u``."""
    return lp_norm(magnitude(u), p, grid)


def integral(f: np.ndarray, grid: Grid) -> float:
    grid.check(f)
    return float(np.sum(f)) * grid.cell_volume


def inner_product(f: np.ndarray, g: np.ndarray, grid: Grid) -> float:
    """Riemann-sum L^2 pairing; vector and tensor fields pair componentwise."""
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape != g.shape:
        raise GridMismatch(f"cannot pair fields of shapes {f.shape} and {g.shape}")
    grid.check(f)
    return float(np.sum(f * g)) * grid.cell_volume
