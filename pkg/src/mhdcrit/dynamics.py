"""Time integration of the incompressible MHD system on the periodic box.

The pressure never appears explicitly: nonlinear terms are written in
conservative form, dealiased and Leray-projected. Diffusion is integrated
exactly by per-mode exponential factors (integrating-factor / Lawson RK4).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BlowupDetected, GridMismatch, NotSolenoidal
from .grid import Grid, magnitude
from .spectral import Spectral, spectral

log = logging.getLogger(__name__)

FORMS = ("primitive", "elsasser")
DIV_TOL = 1e-10
DIV_FLOOR = 1e-300


@dataclass
class State:
    """Velocity ``u`` and magnetic field ``b`` (shape ``(3, nx, ny, nz)``) at time ``t``."""

    u: np.ndarray
    b: np.ndarray
    t: float
    grid: Grid

    def __post_init__(self):
        self.grid.check(self.u, self.b)
        if self.u.shape[0] != 3 or self.b.shape[0] != 3:
            raise GridMismatch("u and b must carry three components")


@dataclass
class ElsasserState:
    w_plus: np.ndarray
    w_minus: np.ndarray
    t: float
    grid: Grid


def to_elsasser(s: State) -> ElsasserState:
    return ElsasserState(s.u + s.b, s.u - s.b, s.t, s.grid)


def from_elsasser(e: ElsasserState) -> State:
    return State(0.5 * (e.w_plus + e.w_minus), 0.5 * (e.w_plus - e.w_minus), e.t, e.grid)


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    nu: float = 1.0
    eta: float = 1.0
    dealias: bool = True
    form: str = "primitive"

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not math.isfinite(self.t_end):
            raise ValueError(f"t_end must be finite, got {self.t_end}")
        if self.nu < 0 or self.eta < 0:
            raise ValueError("nu and eta must be nonnegative")
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {FORMS}, got {self.form!r}")
        if self.form == "elsasser" and self.nu != self.eta:
            raise ValueError("the Elsasser form requires nu == eta")


# nonlinear terms -----------------------------------------------------------

_SYM = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


def _combine(sp: Spectral, F: np.ndarray, rows, dealias: bool) -> np.ndarray:
    """Projected ``-i k_j F[r(i, j)]`` for each output row, ``rows[i][j] = (index, sign)``.

    With dealiasing the work is done on the compact block of kept modes.
    """
    if dealias:
        F, k, khat = sp.compact(F), sp.kd_c, sp.khat_c
    else:
        k, khat = sp.kd, sp.khat
    out = np.zeros((len(rows),) + F.shape[1:], dtype=complex)
    for i, row in enumerate(rows):
        acc = out[i]
        for j, (r, sign) in enumerate(row):
            if r is None:
                continue
            if sign > 0:
                acc += k[j] * F[r]
            else:
                acc -= k[j] * F[r]
    out *= -1j
    U = out.reshape((len(rows) // 3, 3) + F.shape[1:])
    out = sp.leray_hat(U, nyquist=not dealias, inplace=True, khat=khat).reshape(out.shape)
    return sp.expand(out) if dealias else out


def _sym_index(i, j):
    return _SYM.index((min(i, j), max(i, j)))


# row tables: momentum uses the symmetric tensor u_i u_j - b_i b_j (rows 0-5),
# induction the antisymmetric A_ij = u_j b_i - b_j u_i stored for i < j (rows 6-8)
_PRIM_ROWS = tuple(tuple((_sym_index(i, j), 1) for j in range(3)) for i in range(3)) + tuple(
    tuple((None, 1) if i == j else (6 + _SYM[3:].index((min(i, j), max(i, j))), 1 if i < j else -1)
          for j in range(3))
    for i in range(3)
)
_ELS_ROWS = tuple(tuple((3 * i + j, 1) for j in range(3)) for i in range(3)) + tuple(
    tuple((3 * j + i, 1) for j in range(3)) for i in range(3)
)


def _nonlinear_primitive(sp: Spectral, u, b, dealias):
    """Conservative forms -d_j(u_j u_i - b_j b_i) and -d_j(u_j b_i - b_j u_i)."""
    prod = np.empty((9,) + sp.grid.n)
    for r, (i, j) in enumerate(_SYM):
        np.subtract(u[i] * u[j], b[i] * b[j], out=prod[r])
    for r, (i, j) in enumerate(_SYM[3:], start=6):
        np.subtract(u[j] * b[i], b[j] * u[i], out=prod[r])
    return _combine(sp, sp.forward(prod), _PRIM_ROWS, dealias)


def _nonlinear_elsasser(sp: Spectral, wp, wm, dealias):
    """-d_j(wm_j wp_i) for w+ and -d_j(wp_j wm_i) for w-, sharing nine products."""
    prod = (wm[None, :] * wp[:, None]).reshape((9,) + sp.grid.n)
    return _combine(sp, sp.forward(prod), _ELS_ROWS, dealias)


def _nonlinear_hat(sp: Spectral, X: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Projected nonlinear tendency of the stacked spectral state ``X`` (6 rows)."""
    x = sp.inverse(X)
    if cfg.form == "primitive":
        return _nonlinear_primitive(sp, x[:3], x[3:], cfg.dealias)
    return _nonlinear_elsasser(sp, x[:3], x[3:], cfg.dealias)


def _pack(s: State, cfg: SolverConfig, sp: Spectral) -> np.ndarray:
    if cfg.form == "primitive":
        return sp.forward(np.concatenate([s.u, s.b]))
    return sp.forward(np.concatenate([s.u + s.b, s.u - s.b]))


def _unpack(X: np.ndarray, t: float, cfg: SolverConfig, sp: Spectral) -> State:
    x = sp.inverse(X)
    if cfg.form == "primitive":
        return State(x[:3], x[3:], t, sp.grid)
    return State(0.5 * (x[:3] + x[3:]), 0.5 * (x[:3] - x[3:]), t, sp.grid)


def check_solenoidal(s: State, tol: float = DIV_TOL) -> tuple[float, float]:
    """Return the largest spectral divergence amplitudes of u and b.

    Raises NotSolenoidal when either exceeds ``tol`` times the mode scale
    ``max|k| (||u||_2 + ||b||_2) / sqrt(vol) + floor``.
    """
    sp = spectral(s.grid)
    U, B = sp.forward(s.u), sp.forward(s.b)
    du, db = sp.max_divergence_hat(U), sp.max_divergence_hat(B)
    scale = (math.sqrt(sp.sum_sq(U)) + math.sqrt(sp.sum_sq(B))) / math.sqrt(s.grid.volume)
    kmax = math.sqrt(float(sp.k2.max()))
    if max(du, db) > tol * (kmax * scale + DIV_FLOOR):
        raise NotSolenoidal(f"divergence {max(du, db):.3e} exceeds tolerance at t={s.t}")
    return du, db


def tendency(s: State, cfg: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    """Physical-space time derivatives (du/dt, db/dt) with pressure eliminated."""
    sp = spectral(s.grid)
    check_solenoidal(s, 1e-8)
    X = _pack(s, cfg, sp)
    N = _nonlinear_hat(sp, X, cfg)
    rate = _rates(cfg)
    T = N - rate * sp.k2 * X
    x = sp.inverse(T)
    if cfg.form == "primitive":
        return x[:3], x[3:]
    return 0.5 * (x[:3] + x[3:]), 0.5 * (x[:3] - x[3:])


def _rates(cfg: SolverConfig) -> np.ndarray:
    if cfg.form == "primitive":
        r = [cfg.nu] * 3 + [cfg.eta] * 3
    else:
        r = [cfg.nu] * 6
    return np.array(r).reshape(6, 1, 1, 1)


class Integrator:
    """Lawson (integrating-factor) RK4 on the stacked spectral state."""

    def __init__(self, init: State, cfg: SolverConfig, dt: float | None = None):
        self.sp = spectral(init.grid)
        self.cfg = cfg
        self.dt = cfg.dt if dt is None else dt
        self.t0 = init.t
        self.nstep = 0
        self.X = _pack(init, cfg, self.sp)
        decay = _rates(cfg) * self.sp.k2
        self.E = np.exp(-decay * self.dt)
        self.Eh = np.exp(-decay * self.dt / 2)

    @property
    def t(self) -> float:
        return self.t0 + self.nstep * self.dt

    def advance(self) -> None:
        # overflow is expected on the way to a blowup, which the finiteness check reports
        with np.errstate(over="ignore", invalid="ignore"):
            self._advance()

    def _advance(self) -> None:
        sp, cfg, dt, E, Eh = self.sp, self.cfg, self.dt, self.E, self.Eh
        X = self.X
        k1 = _nonlinear_hat(sp, X, cfg)
        tmp = X + (0.5 * dt) * k1
        tmp *= Eh
        k2 = _nonlinear_hat(sp, tmp, cfg)
        EhX = Eh * X
        np.multiply(k2, 0.5 * dt, out=tmp)
        tmp += EhX
        k3 = _nonlinear_hat(sp, tmp, cfg)
        EX = E * X
        np.multiply(Eh, k3, out=tmp)
        tmp *= dt
        tmp += EX
        k4 = _nonlinear_hat(sp, tmp, cfg)
        k2 += k3
        k2 *= Eh
        k2 *= 2.0
        k1 *= E
        k1 += k2
        k1 += k4
        k1 *= dt / 6.0
        k1 += EX
        Xn = sp.leray_hat(k1.reshape((2, 3) + sp.spec_shape), nyquist=not cfg.dealias,
                          inplace=True).reshape(k1.shape)
        if not np.all(np.isfinite(Xn)):
            raise BlowupDetected(
                f"non-finite state after step to t={self.t + dt}", self.t, {"energy": self.energy()}
            )
        self.X = Xn
        self.nstep += 1

    def energy(self) -> float:
        return self.sp.sum_sq(self.X)

    def state(self) -> State:
        return _unpack(self.X, self.t, self.cfg, self.sp)


def step(s: State, cfg: SolverConfig) -> State:
    """One integrating-factor RK4 step of size ``cfg.dt``."""
    it = Integrator(s, cfg)
    it.advance()
    return it.state()


def n_steps(t0: float, t_end: float, dt: float) -> int:
    span = t_end - t0
    if span < 0:
        raise ValueError(f"t_end {t_end} precedes the initial time {t0}")
    return max(int(math.ceil(span / dt - 1e-9)), 0)


Hook = Callable[[int, State], None]


def _cfl_limit(s: State) -> float:
    speed = float(np.max(magnitude(s.u) + magnitude(s.b)))
    return math.inf if speed == 0 else 0.5 * min(s.grid.spacing) / speed


def simulate(init: State, cfg: SolverConfig, hooks: Sequence[tuple[int, Hook]] = (),
             record_every: int = 1) -> list[State]:
    """Integrate from ``init.t`` to ``cfg.t_end``.

    The step is shrunk to ``(t_end - t0) / n`` so the run lands on ``t_end``
    exactly with uniform spacing. Each hook ``(every, fn)`` is called as
    ``fn(step, state)`` at step 0, every ``every`` steps and at the final
    step. The returned list holds the states at the same cadence for
    ``record_every`` (0 keeps only the final state).
    """
    n = n_steps(init.t, cfg.t_end, cfg.dt)
    dt = (cfg.t_end - init.t) / n if n else cfg.dt
    it = Integrator(init, cfg, dt)
    if not it.sp.is_solenoidal(it.X[:3]) or not it.sp.is_solenoidal(it.X[3:]):
        raise NotSolenoidal("initial data is not divergence-free")
    warned = False
    out: list[State] = []

    def visit(k: int) -> None:
        nonlocal warned
        due = [fn for every, fn in hooks if k == 0 or k == n or (every and k % every == 0)]
        keep = k == n or (record_every and k % record_every == 0)
        if not (due or keep):
            return
        s = it.state()
        if not warned and dt > _cfl_limit(s):
            log.warning("dt=%g exceeds the advective CFL guide %g at t=%g", dt, _cfl_limit(s), s.t)
            warned = True
        for fn in due:
            fn(k, s)
        if keep:
            out.append(s)

    visit(0)
    for k in range(1, n + 1):
        it.advance()
        visit(k)
    return out


# initial data --------------------------------------------------------------

INIT_KINDS = ("taylor_green", "orszag_tang_3d", "random_bandlimited", "shear_decay", "checkpoint")


def initial_data(kind: str, params: dict | None, grid: Grid, seed: int = 0) -> State:
    """Divergence-free initial fields at t = 0.

    ``orszag_tang_3d`` accepts ``eps`` (out-of-plane components, default
    0.1) and ``z_pert`` (default ``eps``), the amplitude of ``sin z``
    perturbations to u_1 and b_2. Without them the data is z-independent
    and stays so under the dynamics.
    """
    params = dict(params or {})
    x, y, z = grid.mesh()
    zero = np.zeros(grid.n)

    def vec(*comps):
        return np.stack([np.broadcast_to(c, grid.n) + zero for c in comps])

    if kind == "taylor_green":
        A = float(params.get("amplitude", 1.0))
        u = A * vec(np.cos(x) * np.sin(y), -np.sin(x) * np.cos(y), zero)
        b = np.zeros_like(u)
    elif kind == "orszag_tang_3d":
        eps = float(params.get("eps", 0.1))
        zp = float(params.get("z_pert", eps))
        u = vec(-np.sin(y) + zp * np.sin(z), np.sin(x), eps * np.sin(x))
        b = vec(-np.sin(y), np.sin(2 * x) + zp * np.sin(z), eps * np.sin(y))
    elif kind == "shear_decay":
        A = float(params.get("amplitude", 1.0))
        u = A * vec(np.sin(z), zero, zero)
        b = A * vec(zero, np.sin(z), zero)
    elif kind == "random_bandlimited":
        u, b = _random_bandlimited(grid, seed, float(params.get("k_max", 4)),
                                   float(params.get("energy_u", 0.5)),
                                   float(params.get("energy_b", 0.5)))
    elif kind == "checkpoint":
        from .io import read_checkpoint

        return read_checkpoint(params["path"], grid)
    else:
        raise ValueError(f"unknown initial data kind {kind!r}; expected one of {INIT_KINDS}")
    return State(u, b, 0.0, grid)


def _random_bandlimited(grid: Grid, seed: int, k_max: float, energy_u: float, energy_b: float):
    """Random solenoidal fields with modes ``0 < |m| <= k_max``.

    ``energy_*`` is the mean square ``||f||_2^2 / vol`` of each field.
    """
    sp = spectral(grid)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((6,) + grid.n)
    m2 = sp.m[0] ** 2 + sp.m[1] ** 2 + sp.m[2] ** 2
    mask = (m2 > 0) & (m2 <= k_max**2) & sp.not_nyquist
    out = []
    for F, e in ((sp.forward(noise[:3]), energy_u), (sp.forward(noise[3:]), energy_b)):
        F = sp.leray_hat(F * mask)
        ms = sp.sum_sq(F) / grid.volume
        out.append(sp.inverse(F * (math.sqrt(e / ms) if ms > 0 else 0.0)))
    return out[0], out[1]
