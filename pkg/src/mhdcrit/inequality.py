"""Numerical checks of anisotropic Gagliardo-Nirenberg type inequalities.

Three inequalities are examined for scalar functions on R^3, emulated on
the periodic box with test functions that decay well inside it:

* ``A1``: ||phi||_gamma <= C ||phi_x||_lam^(1/3) ||phi_y||_lam^(1/3) ||phi_z||_mu^(1/3)
  with gamma = 3 lam / (2 - lam (1 - 1/mu)).
* ``A2``: the ``lam = 2`` case, ||phi||_(3 mu) <= C ||phi_x||_2^(1/3) ||phi_y||_2^(1/3) ||phi_z||_mu^(1/3).
* ``A6``: ||phi||_q <= C ||phi||_2^((6-q)/(2q)) prod_i ||d_i phi||_2^((q-2)/(2q)), 2 <= q <= 6.

Each ``check_*`` returns LHS / RHS. Since both sides are homogeneous of
the same degree and scale identically under dilations, the ratio of a
separable function (a product of one-dimensional factors) does not
depend on its widths; single Gaussians therefore all share one ratio,
which :func:`gaussian_ratio_exact` gives in closed form.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateInput, InvalidExponent, NonLocalized
from .grid import Grid, lp_norm
from .spectral import spectral

log = logging.getLogger(__name__)

FAMILIES = ("periodized_gaussian", "anisotropic_gaussian", "random_bump_sum")
WHICH = ("A1", "A2", "A6")
LOCALIZATION_TOL = 1e-10
_EXP_TOL = 1e-12


# exponents ------------------------------------------------------------------

def gamma_of(mu: float, lam: float) -> float:
    """gamma = 3 lam / (2 - lam (1 - 1/mu)); raises InvalidExponent naming the failed constraint."""
    mu, lam = float(mu), float(lam)
    if not (mu >= 1 and math.isfinite(mu)):
        raise InvalidExponent(f"constraint 1 <= mu < inf violated: mu = {mu}")
    if not (lam >= 1 and math.isfinite(lam)):
        raise InvalidExponent(f"constraint 1 <= lambda < inf violated: lambda = {lam}")
    s = 1.0 / mu + 2.0 / lam
    if not (s > 1 + _EXP_TOL and s <= 4 + _EXP_TOL):
        raise InvalidExponent(f"constraint 1 < 1/mu + 2/lambda <= 4 violated: 1/mu + 2/lambda = {s:g}")
    return 3.0 * lam / (2.0 - lam * (1.0 - 1.0 / mu))


@dataclass(frozen=True)
class AnisoParams:
    mu: float
    lam: float

    def __post_init__(self):
        gamma_of(self.mu, self.lam)

    @property
    def gamma(self) -> float:
        return gamma_of(self.mu, self.lam)


def _check_q(q: float) -> float:
    q = float(q)
    if not (2 <= q <= 6):
        raise InvalidExponent(f"q must lie in [2, 6], got {q}")
    return q


# test functions ---------------------------------------------------------------

@dataclass(frozen=True)
class TestFunctionSpec:
    """A sum of periodized anisotropic Gaussian bumps.

    ``centers``, ``widths`` and ``amplitudes`` hold one entry per bump;
    ``origin`` is the point about which localization is measured and
    dilations contract. ``length`` is the box side this function was drawn for.
    """

    __test__ = False  # keep pytest from collecting this class

    family: str
    centers: tuple
    widths: tuple
    amplitudes: tuple
    origin: tuple
    length: float = 2 * math.pi
    seed: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not (len(self.centers) == len(self.widths) == len(self.amplitudes) >= 1):
            raise ValueError("centers, widths and amplitudes need one entry per bump")
        for w in self.widths:
            if len(w) != 3 or min(w) <= 0:
                raise ValueError(f"widths must be three positive numbers, got {w}")

    @classmethod
    def gaussian(cls, sigma, length: float = 2 * math.pi, center=None, amplitude: float = 1.0):
        """Single bump; scalar ``sigma`` gives the isotropic family."""
        c = tuple(float(v) for v in (center if center is not None else (length / 2,) * 3))
        if np.ndim(sigma) == 0:
            fam, w = "periodized_gaussian", (float(sigma),) * 3
        else:
            fam, w = "anisotropic_gaussian", tuple(float(v) for v in sigma)
        return cls(fam, (c,), (w,), (float(amplitude),), c, float(length))

    def scaled(self, c: float) -> "TestFunctionSpec":
        return replace(self, amplitudes=tuple(c * a for a in self.amplitudes))

    def dilated(self, s: float) -> "TestFunctionSpec":
        """phi(origin + s (x - origin)): widths and offsets shrink by ``s``."""
        o = np.array(self.origin)
        centers = tuple(tuple(o + (np.array(c) - o) / s) for c in self.centers)
        widths = tuple(tuple(v / s for v in w) for w in self.widths)
        return replace(self, centers=centers, widths=widths)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "centers": [list(c) for c in self.centers],
            "widths": [list(w) for w in self.widths],
            "amplitudes": list(self.amplitudes),
            "origin": list(self.origin),
            "length": self.length,
            "seed": self.seed,
        }


def _wrap(d: np.ndarray, L: float) -> np.ndarray:
    return d - L * np.round(d / L)


def _factor(x: np.ndarray, c: float, s: float, L: float, deriv: bool):
    """Periodized 1-D Gaussian factor (and its derivative) with nearest images."""
    d = _wrap(x - c, L)
    g = np.zeros_like(x)
    dg = np.zeros_like(x)
    for m in (-1, 0, 1):
        y = d + m * L
        e = np.exp(-0.5 * (y / s) ** 2)
        g += e
        if deriv:
            dg -= y / s**2 * e
    return g, dg


def evaluate(spec: TestFunctionSpec, grid: Grid, derivatives: bool = False,
             check: bool = True):
    """Sample ``spec`` on ``grid``; with ``derivatives`` also return analytic (phi_x, phi_y, phi_z).

    Raises NonLocalized when the mass outside the central ball of radius
    L/4 exceeds 1e-10 of the total (``check=False`` skips the test).
    """
    if abs(grid.length - spec.length) > 1e-12 * spec.length:
        raise ValueError(f"spec drawn for box length {spec.length}, grid has {grid.length}")
    xs = grid.coords
    phi = np.zeros(grid.n)
    d = np.zeros((3,) + grid.n) if derivatives else None
    for c, w, a in zip(spec.centers, spec.widths, spec.amplitudes):
        f = [_factor(xs[i], c[i], w[i], grid.length, derivatives) for i in range(3)]
        gx, gy, gz = (f[i][0] for i in range(3))
        phi += a * gx[:, None, None] * gy[None, :, None] * gz[None, None, :]
        if derivatives:
            d[0] += a * f[0][1][:, None, None] * gy[None, :, None] * gz[None, None, :]
            d[1] += a * gx[:, None, None] * f[1][1][None, :, None] * gz[None, None, :]
            d[2] += a * gx[:, None, None] * gy[None, :, None] * f[2][1][None, None, :]
    if check:
        frac = localization_fraction(phi, grid, spec.origin)
        if frac > LOCALIZATION_TOL:
            raise NonLocalized(f"{frac:.3e} of the mass lies beyond L/4 of the origin")
    return (phi, d) if derivatives else phi


def localization_fraction(phi: np.ndarray, grid: Grid, origin: Sequence[float]) -> float:
    """Fraction of the L^1 mass of ``phi`` at periodic distance > L/4 from ``origin``."""
    x, y, z = grid.mesh()
    L = grid.length
    r2 = _wrap(x - origin[0], L) ** 2 + _wrap(y - origin[1], L) ** 2 + _wrap(z - origin[2], L) ** 2
    a = np.abs(phi)
    total = float(a.sum())
    if total == 0:
        return 0.0
    return float(a[np.broadcast_to(r2 > (L / 4) ** 2, grid.n)].sum()) / total


def random_spec(family: str, rng: np.random.Generator, length: float = 2 * math.pi) -> TestFunctionSpec:
    """Draw a localized member of ``family``.

    Widths never exceed L/32, which keeps the outer-shell mass far below
    the localization tolerance. Anisotropic draws have sigma_z / sigma_x
    log-uniform in [1/8, 8].
    """
    L = length
    o = (L / 2,) * 3
    smax = L / 32
    if family == "periodized_gaussian":
        s = smax * math.exp(rng.uniform(-math.log(2), 0))
        c = tuple(L / 2 + rng.uniform(-L / 128, L / 128, 3))
        return TestFunctionSpec(family, (c,), ((s, s, s),), (rng.uniform(0.5, 2),), c, L)
    if family == "anisotropic_gaussian":
        a = math.exp(rng.uniform(-math.log(8), math.log(8)))
        sx, sz = (smax / a, smax) if a >= 1 else (smax, smax * a)
        c = tuple(L / 2 + rng.uniform(-L / 128, L / 128, 3))
        return TestFunctionSpec(family, (c,), ((sx, sx, sz),), (rng.uniform(0.5, 2),), c, L)
    if family == "random_bump_sum":
        k = int(rng.integers(2, 5))
        centers = tuple(tuple(L / 2 + rng.uniform(-L / 64, L / 64, 3)) for _ in range(k))
        widths = tuple(tuple(L / 40 * np.exp(rng.uniform(-math.log(2), 0, 3))) for _ in range(k))
        amps = tuple(rng.choice([-1.0, 1.0]) * rng.uniform(0.25, 1.0) for _ in range(k))
        return TestFunctionSpec(family, centers, widths, amps, o, L)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


# ratios -----------------------------------------------------------------------

def _derivatives(phi: np.ndarray, grid: Grid) -> np.ndarray:
    sp = spectral(grid)
    F = sp.forward(phi)
    out = np.empty((3,) + grid.n)
    for j in range(3):  # one axis at a time keeps the peak memory low on fine grids
        out[j] = sp.inverse(sp.ddx(F, j))
    return out


def _finish(lhs: float, rhs: float) -> float:
    if lhs == 0:
        raise DegenerateInput("test function is identically zero")
    if rhs == 0:
        raise NonLocalized("a derivative norm vanishes: the field is constant along an axis")
    return lhs / rhs


def ratio_A1(phi, d, params: AnisoParams, grid: Grid) -> float:
    lam, mu = params.lam, params.mu
    rhs = (lp_norm(d[0], lam, grid) ** (1 / 3) * lp_norm(d[1], lam, grid) ** (1 / 3)
           * lp_norm(d[2], mu, grid) ** (1 / 3))
    return _finish(lp_norm(phi, params.gamma, grid), rhs)


def ratio_A2(phi, d, mu: float, grid: Grid) -> float:
    gamma_of(mu, 2.0)
    rhs = (lp_norm(d[0], 2, grid) ** (1 / 3) * lp_norm(d[1], 2, grid) ** (1 / 3)
           * lp_norm(d[2], mu, grid) ** (1 / 3))
    return _finish(lp_norm(phi, 3 * float(mu), grid), rhs)


def ratio_A6(phi, d, q: float, grid: Grid) -> float:
    q = _check_q(q)
    e0, e1 = (6 - q) / (2 * q), (q - 2) / (2 * q)
    rhs = lp_norm(phi, 2, grid) ** e0
    for i in range(3):
        rhs *= lp_norm(d[i], 2, grid) ** e1
    return _finish(lp_norm(phi, q, grid), rhs)


def check_A1(phi: np.ndarray, params: AnisoParams, grid: Grid) -> float:
    """||phi||_gamma / (||phi_x||_lam ||phi_y||_lam ||phi_z||_mu)^(1/3), spectral derivatives."""
    return ratio_A1(phi, _derivatives(phi, grid), params, grid)


def check_A2(phi: np.ndarray, mu: float, grid: Grid) -> float:
    """||phi||_(3 mu) / (||phi_x||_2 ||phi_y||_2 ||phi_z||_mu)^(1/3)."""
    return ratio_A2(phi, _derivatives(phi, grid), mu, grid)


def check_A6(phi: np.ndarray, q: float, grid: Grid) -> float:
    """||phi||_q over ||phi||_2^((6-q)/(2q)) times the derivative L^2 norms to the power (q-2)/(2q)."""
    _check_q(q)
    return ratio_A6(phi, _derivatives(phi, grid), q, grid)


def _ratio(which: str, phi, d, grid, params=None, q=None) -> float:
    if which == "A1":
        return ratio_A1(phi, d, params, grid)
    if which == "A2":
        return ratio_A2(phi, d, params.mu, grid)
    if which == "A6":
        return ratio_A6(phi, d, q, grid)
    raise ValueError(f"unknown inequality {which!r}; expected one of {WHICH}")


def spec_ratio(spec: TestFunctionSpec, grid: Grid, which: str, params: AnisoParams | None = None,
               q: float | None = None) -> float:
    """Ratio for ``spec`` sampled on ``grid`` with spectral derivatives."""
    phi = evaluate(spec, grid)
    return _ratio(which, phi, _derivatives(phi, grid), grid, params, q)


def oracle_ratio(spec: TestFunctionSpec, grid: Grid, which: str, params: AnisoParams | None = None,
                 q: float | None = None) -> float:
    """Independent evaluation on the doubled grid with analytic derivatives."""
    fine = Grid(tuple(2 * v for v in grid.n), grid.length)
    phi, d = evaluate(spec, fine, derivatives=True)
    return _ratio(which, phi, d, fine, params, q)


def _gauss_moment(lam: float, a: float) -> float:
    """integral over R of |x|^lam exp(-a x^2)."""
    return math.exp(gammaln((lam + 1) / 2) - (lam + 1) / 2 * math.log(a))


def _gauss_norm(widths, p: float, deriv_axis: int | None = None) -> float:
    """L^p norm on R^3 of exp(-sum x_i^2 / (2 s_i^2)) or of its derivative along ``deriv_axis``."""
    logs = 0.0
    for i, s in enumerate(widths):
        a = p / (2 * s * s)
        if i == deriv_axis:
            logs += math.log(_gauss_moment(p, a)) - 2 * p * math.log(s)
        else:
            logs += 0.5 * math.log(math.pi / a)
    return math.exp(logs / p)


def gaussian_ratio_exact(widths, which: str, params: AnisoParams | None = None,
                         q: float | None = None) -> float:
    """Closed-form R^3 ratio for a single Gaussian with the given axis widths."""
    w = tuple(float(v) for v in widths)
    if which in ("A1", "A2"):
        lam, mu = (params.lam, params.mu) if which == "A1" else (2.0, params.mu)
        g = gamma_of(mu, lam)
        rhs = (_gauss_norm(w, lam, 0) * _gauss_norm(w, lam, 1) * _gauss_norm(w, mu, 2)) ** (1 / 3)
        return _gauss_norm(w, g) / rhs
    q = _check_q(q)
    rhs = _gauss_norm(w, 2) ** ((6 - q) / (2 * q))
    for i in range(3):
        rhs *= _gauss_norm(w, 2, i) ** ((q - 2) / (2 * q))
    return _gauss_norm(w, q) / rhs


# invariants and sweeps -----------------------------------------------------------

def dilation_invariance(spec: TestFunctionSpec, grid: Grid, s: int, which: str,
                        params: AnisoParams | None = None, q: float | None = None) -> tuple[float, float]:
    """Ratios of ``phi`` and of its contraction ``phi(origin + s (x - origin))``.

    The contraction is evaluated from the analytic family rather than by
    subsampling, which on the torus would create periodic copies.
    """
    if int(s) != s or s < 1:
        raise ValueError(f"dilation factor must be a positive integer, got {s}")
    return (spec_ratio(spec, grid, which, params, q),
            spec_ratio(spec.dilated(s), grid, which, params, q))


@dataclass
class EmpiricalResult:
    """Lower bound on the best constant: the largest ratio seen over the trials."""

    sup_ratio: float
    argmax: int
    argmax_spec: TestFunctionSpec
    ratios: list = field(default_factory=list)
    skipped: int = 0


def trial_rng(seed: int, i: int) -> np.random.Generator:
    """Per-trial generator, so trial ``i`` does not depend on how many run."""
    return np.random.default_rng((int(seed), int(i)))


def empirical_constant(family: str, which: str, trials: int, seed: int, grid: Grid,
                       params: AnisoParams | None = None, q: float | None = None) -> EmpiricalResult:
    """Largest ratio over ``trials`` random localized members of ``family``.

    Trials raising NonLocalized or DegenerateInput are skipped (their
    ratio is recorded as None). Ties go to the lower trial index.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if which in ("A1", "A2") and params is None:
        raise ValueError(f"{which} needs (mu, lambda) parameters")
    if which == "A6":
        _check_q(q)
    best, arg, best_spec = -math.inf, -1, None
    ratios: list = []
    for i in range(trials):
        spec = replace(random_spec(family, trial_rng(seed, i), grid.length), seed=int(seed))
        try:
            r = spec_ratio(spec, grid, which, params, q)
        except (NonLocalized, DegenerateInput) as exc:
            log.debug("trial %d skipped: %s", i, exc)
            ratios.append(None)
            continue
        ratios.append(r)
        if r > best:
            best, arg, best_spec = r, i, spec
    if best_spec is None:
        raise DegenerateInput(f"all {trials} trials were degenerate")
    return EmpiricalResult(best, arg, best_spec, ratios, sum(r is None for r in ratios))
