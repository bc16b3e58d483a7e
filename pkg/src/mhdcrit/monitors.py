"""Regularity-criterion monitors and energy-identity diagnostics.

A :class:`Sample` holds every scalar measured on one state; a
:class:`MonitorSeries` accumulates samples along a trajectory together
with the time integrals of the criterion norms. The identity residuals
(energy law, z-derivative balance, H^1 balance, L^4 balance of the
Elsasser fields) are evaluated from the stored scalars, with the time
derivative taken by second-order finite differences on the sample times.

Conventions: vector and gradient norms use the pointwise Euclidean /
Frobenius magnitude; all integrals are Riemann sums over the box.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dynamics import State
from .errors import InvalidExponent, TimeOrder, WindowTooShort
from .grid import Grid, lp_norm, vector_lp_norm
from .spectral import spectral

KINDS = ("velocity_z", "pressure_z", "gradient_velocity")
ADMISSIBLE_TOL = 1e-12
INF = math.inf


@dataclass(frozen=True)
class CriterionSpec:
    kind: str
    alpha: float
    beta: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown criterion kind {self.kind!r}; expected one of {KINDS}")
        if not (self.alpha >= 1 and math.isfinite(self.alpha)):
            raise InvalidExponent(f"alpha must be a finite real >= 1, got {self.alpha}")
        if not self.beta >= 1:
            raise InvalidExponent(f"beta must be >= 1 or inf, got {self.beta}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def label(self) -> str:
        return f"{self.kind}:{self.alpha:g}:{self.beta:g}"


DEFAULT_SPECS = (CriterionSpec("velocity_z", 6.0, 4.0), CriterionSpec("pressure_z", 4.0, 2.0))


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    slack: float


def scaling_sum(alpha: float, beta: float) -> float:
    return 3.0 / alpha + (0.0 if math.isinf(beta) else 2.0 / beta)


def check_admissible(spec: CriterionSpec) -> Admissibility:
    """Classify ``spec`` against the exponent condition of its kind.

    ``slack`` is the bound minus the attained ``3/alpha + 2/beta``.
    """
    value = scaling_sum(spec.alpha, spec.beta)
    tol = ADMISSIBLE_TOL
    if spec.kind == "velocity_z":
        bound = 1.0
        ok = spec.alpha >= 3 - tol and value <= bound + tol
    elif spec.kind == "pressure_z":
        bound = 7.0 / 4.0
        ok = spec.alpha >= 12.0 / 7.0 - tol and value <= bound + tol
    else:
        bound = 2.0
        ok = abs(value - bound) <= tol and 1 < spec.beta <= 2 + tol
    return Admissibility(bool(ok), bound - value)


@dataclass(frozen=True)
class HolderExponents:
    """Exponents of the Hölder/Sobolev chains for a spatial exponent ``alpha``.

    ``r``: 1/r + 1/(3 alpha) = 1/2; ``q`` = 2 / (3 (1 - 1/alpha));
    ``gamma`` = 2 / (1 - 3/alpha) (infinite at alpha = 3);
    ``lambda_p``: 1/alpha + 2/lambda = 7/4 for the pressure chain;
    ``b_exponent`` = 2 alpha / (alpha - 2) pairs with ||u_z||_alpha in I_2;
    ``gronwall_exponent`` = (2 alpha - 6) / (2 alpha - 3), recorded only.
    """

    alpha: float
    r: float
    q: float
    gamma: float
    lambda_p: float
    b_exponent: float
    gronwall_exponent: float

    @classmethod
    def from_alpha(cls, alpha: float) -> "HolderExponents":
        a = float(alpha)
        if not a > 1:
            raise InvalidExponent(f"alpha must exceed 1, got {alpha}")
        r = 1.0 / (0.5 - 1.0 / (3 * a))
        q = 2.0 / (3 * (1 - 1.0 / a))
        gamma = INF if a <= 3 else 2.0 / (1 - 3.0 / a)
        lam = 2.0 / (7.0 / 4.0 - 1.0 / a)
        bexp = INF if a <= 2 else 2 * a / (a - 2)
        return cls(a, r, q, gamma, lam, bexp, (2 * a - 6) / (2 * a - 3))


# sampling --------------------------------------------------------------------

@dataclass
class Sample:
    """Scalars measured on one state. Entries not computed at the chosen level are NaN."""

    t: float
    E_u: float
    E_b: float
    grad_u_sq: float
    grad_b_sq: float
    div_u_max: float
    div_b_max: float
    norms: dict = field(default_factory=dict)
    uz_sq: float = math.nan
    bz_sq: float = math.nan
    grad_uz_sq: float = math.nan
    grad_bz_sq: float = math.nan
    I: tuple = (math.nan,) * 4
    lap_u_sq: float = math.nan
    lap_b_sq: float = math.nan
    # the integrals (u.grad u).lap u, (b.grad b).lap u, (u.grad b).lap b, (b.grad u).lap b
    h1_terms: tuple = (math.nan,) * 4
    cubic_bound: float = math.nan
    w4: tuple = (math.nan, math.nan)
    grad_w2_sq: tuple = (math.nan, math.nan)
    w2_grad_w_sq: tuple = (math.nan, math.nan)
    J: tuple = (math.nan, math.nan)


def _adv(a: np.ndarray, G: np.ndarray) -> np.ndarray:
    """(a . grad) v given the gradient tensor ``G[i, j] = d_j v_i``."""
    return G[:, 0] * a[0] + G[:, 1] * a[1] + G[:, 2] * a[2]


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _grad_sq_norm(w: np.ndarray, G: np.ndarray) -> np.ndarray:
    """grad |w|^2 by the product rule, evaluated pointwise."""
    return 2.0 * (w[0] * G[0] + w[1] * G[1] + w[2] * G[2])


def criterion_norm(spec: CriterionSpec, uz: np.ndarray, pz: np.ndarray | None,
                   gu: np.ndarray, grid: Grid) -> float:
    if spec.kind == "velocity_z":
        return vector_lp_norm(uz, spec.alpha, grid)
    if spec.kind == "pressure_z":
        return lp_norm(pz, spec.alpha, grid)
    return vector_lp_norm(gu, spec.alpha, grid)


def sample(state: State, pressure: np.ndarray | None = None,
           specs: Sequence[CriterionSpec] = DEFAULT_SPECS, dealias: bool = True,
           level: str = "full") -> Sample:
    """Measure ``state``.

    ``level='budget'`` computes only energies, gradient norms and
    divergences (no physical-space transforms); ``'full'`` computes
    everything. The pressure is solved from the state when not supplied.
    """
    grid = state.grid
    sp = spectral(grid)
    dV = grid.cell_volume
    X = sp.forward(np.concatenate([state.u, state.b]))
    U, B = X[:3], X[3:]
    a = (X.real**2 + X.imag**2) * sp.herm_weight
    e = a.reshape(2, -1).sum(axis=1) * grid.volume
    ak = a * sp.k2
    gsq = ak.reshape(2, -1).sum(axis=1) * grid.volume
    s = Sample(
        t=float(state.t),
        E_u=float(e[0]),
        E_b=float(e[1]),
        grad_u_sq=float(gsq[0]),
        grad_b_sq=float(gsq[1]),
        div_u_max=sp.max_divergence_hat(U),
        div_b_max=sp.max_divergence_hat(B),
    )
    if level == "budget":
        s.norms = {sp_.label: math.nan for sp_ in specs}
        return s
    if level != "full":
        raise ValueError(f"unknown sampling level {level!r}")

    GX = sp.grad_hat(X)  # (6, 3, ...): GX[i, j] = d_j x_i
    g = sp.inverse(np.concatenate([GX.reshape((18,) + sp.spec_shape), sp.lap_hat(X)]))
    gu, gb = g[:9].reshape((3, 3) + grid.n), g[9:18].reshape((3, 3) + grid.n)
    lap_u, lap_b = g[18:21], g[21:24]
    u, b = state.u, state.b
    uz, bz = gu[:, 2], gb[:, 2]

    kz = sp.kd[2]
    s.uz_sq = float(np.sum(uz * uz)) * dV
    s.bz_sq = float(np.sum(bz * bz)) * dV
    gz = (ak * kz**2).reshape(2, -1).sum(axis=1) * grid.volume
    s.grad_uz_sq, s.grad_bz_sq = float(gz[0]), float(gz[1])
    s.I = (
        -float(np.sum(_dot(_adv(uz, gu), uz))) * dV,
        float(np.sum(_dot(_adv(bz, gb), uz))) * dV,
        -float(np.sum(_dot(_adv(uz, gb), bz))) * dV,
        float(np.sum(_dot(_adv(bz, gu), bz))) * dV,
    )

    s.lap_u_sq = float(np.sum(lap_u * lap_u)) * dV
    s.lap_b_sq = float(np.sum(lap_b * lap_b)) * dV
    s.h1_terms = (
        float(np.sum(_dot(_adv(u, gu), lap_u))) * dV,
        float(np.sum(_dot(_adv(b, gb), lap_u))) * dV,
        float(np.sum(_dot(_adv(u, gb), lap_b))) * dV,
        float(np.sum(_dot(_adv(b, gu), lap_b))) * dV,
    )
    ngu3 = vector_lp_norm(gu, 3, grid)
    ngb3 = vector_lp_norm(gb, 3, grid)
    s.cubic_bound = ngu3**3 + 3 * ngu3 * ngb3**2

    wp, wm = u + b, u - b
    gwp, gwm = gu + gb, gu - gb
    if pressure is None:
        P = sp.pressure_hat(U - B, U + B, dealias, wm, wp)
        pp = sp.inverse(np.stack([P, sp.ddx(P, 2)]))
        p, pz = pp[0], pp[1]
    else:
        p = pressure
        pz = sp.inverse(sp.ddx(sp.forward(p), 2))
    w4, gq2, wg2, J = [], [], [], []
    for w, gw in ((wp, gwp), (wm, gwm)):
        q = _dot(w, w)
        gq = _grad_sq_norm(w, gw)
        w4.append(float(np.sum(q * q)) * dV)
        gq2.append(float(np.sum(_dot(gq, gq))) * dV)
        wg2.append(float(np.sum(q * np.sum(gw.reshape((9,) + grid.n) ** 2, axis=0))) * dV)
        J.append(float(np.sum(p * _dot(w, gq))) * dV)
    s.w4, s.grad_w2_sq, s.w2_grad_w_sq, s.J = tuple(w4), tuple(gq2), tuple(wg2), tuple(J)
    s.norms = {c.label: criterion_norm(c, uz, pz, gu, grid) for c in specs}
    return s


# series -----------------------------------------------------------------------

@dataclass
class MonitorSeries:
    specs: tuple = DEFAULT_SPECS
    nu: float = 1.0
    eta: float = 1.0
    samples: list = field(default_factory=list)
    integrals: dict = field(default_factory=dict)
    D: list = field(default_factory=list)
    dissipation: list = field(default_factory=list)

    def __post_init__(self):
        self.specs = tuple(self.specs)
        for c in self.specs:
            self.integrals.setdefault(c.label, [])

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples], dtype=float)

    def norm_column(self, label: str) -> np.ndarray:
        return np.array([s.norms.get(label, math.nan) for s in self.samples], dtype=float)

    def append(self, s: Sample) -> "MonitorSeries":
        if self.samples:
            prev = self.samples[-1]
            h = s.t - prev.t
            if not h > 0:
                raise TimeOrder(f"sample time {s.t} does not follow {prev.t}")
            for c in self.specs:
                acc = self.integrals[c.label]
                a, b = prev.norms.get(c.label, math.nan), s.norms.get(c.label, math.nan)
                if math.isinf(c.beta):
                    acc.append(max(acc[-1], b))
                else:
                    acc.append(acc[-1] + 0.5 * h * (a**c.beta + b**c.beta))
            self.D.append(self.D[-1] + 0.5 * h * (prev.grad_uz_sq + prev.grad_bz_sq
                                                  + s.grad_uz_sq + s.grad_bz_sq))
            self.dissipation.append(self.dissipation[-1] + 0.5 * h * (
                self.nu * (prev.grad_u_sq + s.grad_u_sq) + self.eta * (prev.grad_b_sq + s.grad_b_sq)))
        else:
            for c in self.specs:
                v = s.norms.get(c.label, math.nan)
                self.integrals[c.label].append(v if math.isinf(c.beta) else 0.0)
            self.D.append(0.0)
            self.dissipation.append(0.0)
        self.samples.append(s)
        return self

    # residual columns
    def dissipation_rate(self) -> np.ndarray:
        return self.nu * self.column("grad_u_sq") + self.eta * self.column("grad_b_sq")

    def corrected_dissipation(self) -> np.ndarray:
        """Running integral of the dissipation rate, trapezoid plus Hermite end corrections.

        Each interval adds ``h^2/12 (f'_i - f'_(i+1))`` with f' from the
        sample differences; on uniform samples the corrections telescope
        and the rule is fourth-order accurate.
        """
        if not len(self):
            return np.zeros(0)
        t = self.times
        f = self.dissipation_rate()
        df = _ddt(t, f)
        h = np.diff(t)
        corr = np.concatenate([[0.0], np.cumsum(h * h / 12.0 * (df[:-1] - df[1:]))])
        return np.array(self.dissipation) + corr

    def energy_residuals(self) -> np.ndarray:
        """|E(t) + 2 int_0^t (nu ||grad u||^2 + eta ||grad b||^2) - E(0)| / E(0) per sample."""
        E = self.column("E_u") + self.column("E_b")
        if not len(E):
            return E
        r = np.abs(E + 2.0 * self.corrected_dissipation() - E[0])
        return r / E[0] if E[0] > 0 else r

    def zderiv_residuals(self) -> np.ndarray:
        return _zderiv(self.times, [self.samples], self.nu, self.eta)

    def h1_residuals(self) -> np.ndarray:
        return _h1(self.times, [self.samples], self.nu, self.eta)

    def l4_residuals(self) -> np.ndarray:
        return _l4(self.times, [self.samples], self.nu, self.eta)


def accumulate(series: MonitorSeries, new: Sample) -> MonitorSeries:
    """Append ``new`` and advance M, M_p, D by the trapezoid rule (running sup for beta = inf)."""
    return series.append(new)


class MonitorRecorder:
    """Simulation hook: samples the state (pressure re-solved each time) into a series."""

    def __init__(self, specs=DEFAULT_SPECS, nu=1.0, eta=1.0, dealias=True, level="full"):
        self.series = MonitorSeries(tuple(specs), nu, eta)
        self.dealias = dealias
        self.level = level

    def __call__(self, step: int, state: State) -> None:
        self.series.append(sample(state, None, self.series.specs, self.dealias, self.level))


# identity residuals -----------------------------------------------------------

def _ddt(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Second-order finite-difference derivative on possibly nonuniform times.

    With fewer than three samples the stencil degrades: two samples give a
    one-sided difference, a single sample is treated as constant.
    """
    if len(v) >= 3:
        return np.gradient(v, t, edge_order=2)
    if len(v) == 2:
        d = (v[1] - v[0]) / (t[1] - t[0])
        return np.array([d, d])
    return np.zeros(len(v))


def _cols(samples, name):
    return np.array([getattr(s, name) for s in samples], dtype=float)


def _relative(res: np.ndarray, scale: np.ndarray) -> np.ndarray:
    out = np.zeros_like(res)
    np.divide(res, scale, out=out, where=scale > 0)
    return np.where(np.isnan(scale), np.nan, out)


def _zderiv(t, wrapped, nu, eta):
    samples = wrapped[0]
    if not samples:
        return np.zeros(0)
    S = _cols(samples, "uz_sq") + _cols(samples, "bz_sq")
    half_dS = 0.5 * _ddt(t, S)
    diss = nu * _cols(samples, "grad_uz_sq") + eta * _cols(samples, "grad_bz_sq")
    I = np.array([s.I for s in samples], dtype=float)
    res = np.abs(half_dS + diss - I.sum(axis=1))
    scale = np.abs(half_dS) + np.abs(diss) + np.abs(I).sum(axis=1)
    return _relative(res, scale)


def _h1_rhs(h1_terms):
    T = np.asarray(h1_terms, dtype=float)
    return T[..., 0] - T[..., 1] + T[..., 2] - T[..., 3]


def _h1(t, wrapped, nu, eta):
    samples = wrapped[0]
    if not samples:
        return np.zeros(0)
    S = _cols(samples, "grad_u_sq") + _cols(samples, "grad_b_sq")
    half_dS = 0.5 * _ddt(t, S)
    diss = nu * _cols(samples, "lap_u_sq") + eta * _cols(samples, "lap_b_sq")
    T = np.array([s.h1_terms for s in samples], dtype=float)
    res = np.abs(half_dS + diss - _h1_rhs(T))
    scale = np.abs(half_dS) + np.abs(diss) + np.abs(T).sum(axis=1)
    return _relative(res, scale)


def _l4(t, wrapped, nu, eta):
    samples = wrapped[0]
    if not samples:
        return np.zeros(0)
    if nu != eta:
        return np.full(len(samples), np.nan)
    W = np.array([s.w4 for s in samples], dtype=float).sum(axis=1)
    quarter_dW = 0.25 * _ddt(t, W)
    diss = nu * (0.5 * np.array([s.grad_w2_sq for s in samples], dtype=float).sum(axis=1)
                 + np.array([s.w2_grad_w_sq for s in samples], dtype=float).sum(axis=1))
    J = np.array([s.J for s in samples], dtype=float).sum(axis=1)
    return np.abs(quarter_dW + diss - J) / (W + 1.0)


def _window(window: Sequence[Sample]):
    if len(window) < 3:
        raise WindowTooShort(f"need three consecutive samples, got {len(window)}")
    w = list(window[-3:])
    t = np.array([s.t for s in w])
    if not np.all(np.diff(t) > 0):
        raise TimeOrder("window times must increase")
    return t, [w]


def zderiv_identity_residual(window: Sequence[Sample], nu: float = 1.0, eta: float = 1.0) -> float:
    """Relative defect of the z-derivative energy balance at the middle of a 3-sample window.

    Balance: 1/2 d/dt(||u_z||^2 + ||b_z||^2) + nu ||grad u_z||^2 + eta ||grad b_z||^2
    = I1 + I2 + I3 + I4, normalized by the sum of the absolute terms.
    """
    t, w = _window(window)
    return float(_zderiv(t, w, nu, eta)[1])


def h1_identity_residual(window: Sequence[Sample], nu: float = 1.0, eta: float = 1.0) -> float:
    """Relative defect of the enstrophy balance at the middle of a 3-sample window.

    Balance: 1/2 d/dt(||grad u||^2 + ||grad b||^2) + nu ||lap u||^2 + eta ||lap b||^2
    = int (u.grad u).lap u - int (b.grad b).lap u + int (u.grad b).lap b - int (b.grad u).lap b.
    """
    t, w = _window(window)
    return float(_h1(t, w, nu, eta)[1])


def l4_identity_residual(window: Sequence[Sample], nu: float = 1.0, eta: float = 1.0) -> float:
    """Defect of the L^4 balance of w+ and w-, normalized by ||w+||_4^4 + ||w-||_4^4 + 1."""
    t, w = _window(window)
    return float(_l4(t, w, nu, eta)[1])


def energy_residual(series: MonitorSeries, state0: State | None = None,
                    state_t: State | None = None) -> float:
    """Relative defect of the energy law at the last sample.

    Energies come from the given states when provided, otherwise from the
    first and last samples. The dissipation integral uses the corrected
    trapezoid rule of :meth:`MonitorSeries.corrected_dissipation`.
    """
    if not len(series):
        raise ValueError("empty monitor series")
    sp0 = series.samples[0] if state0 is None else sample(state0, level="budget")
    spt = series.samples[-1] if state_t is None else sample(state_t, level="budget")
    E0 = sp0.E_u + sp0.E_b
    r = abs(spt.E_u + spt.E_b + 2.0 * float(series.corrected_dissipation()[-1]) - E0)
    return r / E0 if E0 > 0 else r


def cubic_bound_ratio(s: Sample) -> float:
    """|sum of the four enstrophy-balance integrals| / (||grad u||_3^3 + 3 ||grad u||_3 ||grad b||_3^2)."""
    lhs = abs(float(_h1_rhs(s.h1_terms)))
    if s.cubic_bound == 0:
        return math.nan if lhs else 0.0
    return lhs / s.cubic_bound


# Hölder chains ------------------------------------------------------------------

@dataclass(frozen=True)
class ChainEntry:
    name: str
    cls: str
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float | None:
        """lhs / rhs, or None when the bound vanishes (undefined)."""
        if self.rhs == 0 or not math.isfinite(self.rhs):
            return None
        return self.lhs / self.rhs


@dataclass
class HolderReport:
    exponents: HolderExponents
    entries: list

    def ratios(self, cls: str | None = None) -> dict:
        return {e.name: e.ratio for e in self.entries if cls is None or e.cls == cls}

    @property
    def undefined(self) -> list:
        return [e.name for e in self.entries if e.ratio is None]

    def max_ratio(self, cls: str = "a") -> float:
        vals = [r for r in self.ratios(cls).values() if r is not None]
        return max(vals) if vals else math.nan


def holder_chain_check(state: State, pressure: np.ndarray | None, exps: HolderExponents,
                       chains: Iterable[str] = ("velocity", "pressure"), dealias: bool = True) -> HolderReport:
    """Evaluate both sides of each Hölder step of the velocity and pressure chains.

    Class 'a' steps are plain Hölder with constant 1 and must have ratio <= 1
    up to roundoff. Class 'b' steps hide an unknown constant and are only
    reported.
    """
    chains = tuple(chains)
    a = exps.alpha
    if "velocity" in chains and a < 3 - ADMISSIBLE_TOL:
        raise InvalidExponent(f"the velocity chain needs alpha >= 3, got {a}")
    if "pressure" in chains and a < 12.0 / 7.0 - ADMISSIBLE_TOL:
        raise InvalidExponent(f"the pressure chain needs alpha >= 12/7, got {a}")
    grid = state.grid
    sp = spectral(grid)
    dV = grid.cell_volume
    X = sp.forward(np.concatenate([state.u, state.b]))
    GX = sp.grad_hat(X)
    GZ = sp.grad_hat(sp.ddx(X, 2))  # d_j d_z x_i
    GX = sp.grad_hat(X)  # (6, 3, ...): GX[i, j] = d_j x_i
    g = sp.inverse(np.concatenate([GX.reshape((18,) + sp.spec_shape), GZ.reshape((18,) + sp.spec_shape)]))
    gu, gb = g[:9].reshape((3, 3) + grid.n), g[9:18].reshape((3, 3) + grid.n)
    guz, gbz = g[18:27].reshape((3, 3) + grid.n), g[27:36].reshape((3, 3) + grid.n)
    u, b = state.u, state.b
    uz, bz = gu[:, 2], gb[:, 2]
    L = vector_lp_norm
    entries = []
    if "velocity" in chains:
        I1 = abs(float(np.sum(_dot(_adv(uz, guz), u))) * dV)
        I2 = abs(float(np.sum(_dot(_adv(bz, gb), uz))) * dV)
        I4 = abs(float(np.sum(_dot(_adv(bz, gbz), u))) * dV)
        nu3a = L(u, 3 * a, grid)
        entries += [
            ChainEntry("I1", "a", I1, L(guz, 2, grid) * L(uz, exps.r, grid) * nu3a),
            ChainEntry("I2", "a", I2, L(gb, 2, grid) * L(uz, a, grid) * L(bz, exps.b_exponent, grid)),
            ChainEntry("I4", "a", I4, L(gbz, 2, grid) * L(bz, exps.r, grid) * nu3a),
        ]
    if "pressure" in chains:
        wp, wm = u + b, u - b
        gwp = gu + gb
        if pressure is None:
            P = sp.pressure_hat(X[:3] - X[3:], X[:3] + X[3:], dealias, wm, wp)
        else:
            P = sp.forward(pressure)
        pg = sp.inverse(np.concatenate([P[None], sp.grad_hat(P)]))
        p, gp = pg[0], pg[1:]
        gq = _grad_sq_norm(wp, gwp)
        J1 = abs(float(np.sum(p * _dot(wp, gq))) * dV)
        lam = exps.lambda_p
        entries += [
            ChainEntry("J1", "a", J1, lp_norm(p, 4, grid) * L(wp, 4, grid) * L(gq, 2, grid)),
            ChainEntry("p4_gn", "b", lp_norm(p, 4, grid),
                       lp_norm(gp[2], a, grid) ** (1 / 3) * L(gp, lam, grid) ** (2 / 3)),
            ChainEntry("grad_p_lambda", "b", L(gp, lam, grid),
                       L(wm, 2 * lam / (2 - lam), grid) * L(gwp, 2, grid)),
        ]
    return HolderReport(exps, entries)
