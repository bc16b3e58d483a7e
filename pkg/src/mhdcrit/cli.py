"""Command-line entry point: ``mhdcrit <subcommand> ...``.

Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
numerical failures during a run (partial outputs are still written).
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .dynamics import initial_data, simulate
from .errors import BlowupDetected, CheckpointError, ConfigError, InvalidExponent, MHDError
from .grid import Grid
from .inequality import FAMILIES, AnisoParams, empirical_constant
from .monitors import (DEFAULT_SPECS, CriterionSpec, MonitorRecorder, MonitorSeries,
                       check_admissible, sample)

log = logging.getLogger("mhdcrit")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _beta(text: str) -> float:
    return math.inf if text.strip().lower() in ("inf", "infinity", "∞") else float(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mhdcrit", description="Regularity-criterion monitors for 3D incompressible MHD.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run a trajectory with monitors")
    s.add_argument("--config", required=True, type=Path)

    c = sub.add_parser("check-criteria", help="classify a criterion exponent pair")
    c.add_argument("--kind", required=True, choices=sorted(io.KIND_ALIASES) + sorted(io.KIND_ALIASES.values()))
    c.add_argument("--alpha", required=True, type=float)
    c.add_argument("--beta", required=True, type=_beta)

    v = sub.add_parser("verify-inequalities", help="sample the anisotropic inequalities")
    v.add_argument("--which", choices=("A1", "A2", "A6", "all"), default="all")
    v.add_argument("--grid", type=int, default=32)
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--mu", type=float, default=2.0)
    v.add_argument("--lambda", dest="lam", type=float, default=2.0)
    v.add_argument("--q", type=float, default=4.0)
    v.add_argument("--family", choices=FAMILIES, default="anisotropic_gaussian")
    v.add_argument("--out", type=Path, default=Path("inequality_report.json"))

    r = sub.add_parser("replay", help="recompute monitors from stored checkpoints")
    r.add_argument("--checkpoints", required=True, type=Path)
    r.add_argument("--kind", required=True, choices=sorted(io.KIND_ALIASES) + sorted(io.KIND_ALIASES.values()))
    r.add_argument("--alpha", required=True, type=float)
    r.add_argument("--beta", required=True, type=_beta)
    r.add_argument("--out", type=Path, default=None, help="CSV path (default <checkpoints>/replay.csv)")
    return p


def _spec(kind: str, alpha: float, beta: float) -> CriterionSpec:
    return CriterionSpec(io.KIND_ALIASES.get(kind, kind), alpha, beta)


def _verdict(spec: CriterionSpec) -> dict:
    a = check_admissible(spec)
    return {"admissible": a.admissible, "slack": a.slack + 0.0}


# subcommands ---------------------------------------------------------------------

def _summary(series: MonitorSeries, status: str, extra: dict | None = None) -> dict:
    def mx(a):
        a = np.asarray(a, dtype=float)
        a = a[np.isfinite(a)]
        return float(a.max()) if a.size else math.nan

    out = {
        "status": status,
        "t_final": series.samples[-1].t if len(series) else math.nan,
        "samples": len(series),
        "M": {c.label: (series.integrals[c.label][-1] if len(series) else math.nan) for c in series.specs},
        "D": series.D[-1] if len(series) else math.nan,
        "max_residuals": {
            "energy": mx(series.energy_residuals()),
            "zderiv": mx(series.zderiv_residuals()),
            "h1": mx(series.h1_residuals()),
            "l4": mx(series.l4_residuals()),
        },
        "max_divergence": {"u": mx(series.column("div_u_max")), "b": mx(series.column("div_b_max"))},
        "admissibility": {c.label: _verdict(c) for c in series.specs},
    }
    lu = io._first(series, "velocity_z")
    lp = io._first(series, "pressure_z")
    out["M_T"] = out["M"].get(lu, math.nan) if lu else math.nan
    out["Mp_T"] = out["M"].get(lp, math.nan) if lp else math.nan
    out["D_T"] = out["D"]
    out["energy_residual"] = (series.energy_residuals()[-1] if len(series) else math.nan)
    if extra:
        out.update(extra)
    return out


def cmd_simulate(args) -> int:
    cfg = io.load_config(args.config)
    grid = cfg.grid
    solver = cfg.solver()
    init = initial_data(cfg.init, cfg.init_params, grid, cfg.seed)
    rec = MonitorRecorder(cfg.monitors, cfg.nu, cfg.eta, cfg.dealias, cfg.monitor_level)
    hooks = [(cfg.sample_every, rec)]
    ckdir = cfg.out_dir / "checkpoints"
    if cfg.checkpoint_every:
        def save(step, state):
            io.write_checkpoint(state, ckdir / f"ckpt_{step:08d}.mhdc", cfg.nu, cfg.eta)
        hooks.append((cfg.checkpoint_every, save))
    log.info("simulate: %s on %s, dt=%g, t_end=%g", cfg.init, grid.n, cfg.dt, cfg.t_end)
    status, code, extra = "ok", EXIT_OK, None
    try:
        simulate(init, solver, hooks, record_every=0)
    except BlowupDetected as exc:
        status, code = "blowup", EXIT_NUMERIC
        extra = {"error": str(exc), "blowup_t": exc.t, "diagnostics": exc.diagnostics}
        log.error("%s", exc)
    io.emit_monitor_csv(rec.series, cfg.out_dir / "monitors.csv")
    io.emit_report_json(_summary(rec.series, status, extra), cfg.out_dir / "summary.json")
    print(f"{status}: {len(rec.series)} samples written to {cfg.out_dir}")
    return code


def cmd_check_criteria(args) -> int:
    spec = _spec(args.kind, args.alpha, args.beta)
    a = check_admissible(spec)
    print(f"{'admissible' if a.admissible else 'inadmissible'}, slack {io.fmt(a.slack + 0.0)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.grid < 4 or args.grid % 2:
        raise UsageError(f"--grid must be an even integer >= 4, got {args.grid}")
    if args.trials < 1:
        raise UsageError(f"--trials must be >= 1, got {args.trials}")
    grid = Grid.cube(args.grid)
    which = ("A1", "A2", "A6") if args.which == "all" else (args.which,)
    results = []
    for w in which:
        if w == "A6":
            params, pdict = None, {"q": args.q}
        elif w == "A2":
            params, pdict = AnisoParams(args.mu, 2.0), {"mu": args.mu, "lambda": 2.0}
        else:
            params, pdict = AnisoParams(args.mu, args.lam), {"mu": args.mu, "lambda": args.lam}
        if params is not None:
            pdict["gamma"] = params.gamma
        res = empirical_constant(args.family, w, args.trials, args.seed, grid, params,
                                 args.q if w == "A6" else None)
        results.append({
            "which": w,
            "params": pdict,
            "family": args.family,
            "trials": args.trials,
            "sup_ratio": res.sup_ratio,
            "note": "empirical lower bound on the best constant",
            "argmax": res.argmax,
            "argmax_spec": res.argmax_spec.to_dict(),
            "skipped": res.skipped,
            "ratios": res.ratios,
        })
        print(f"{w}: sup ratio {io.fmt(res.sup_ratio)} over {args.trials} trials (argmax {res.argmax})")
    report = {"grid": args.grid, "seed": args.seed, "trials": args.trials, "results": results}
    io.emit_report_json(report, args.out)
    return EXIT_OK


def replay_series(ckdir: Path, spec: CriterionSpec, dealias: bool = True) -> MonitorSeries:
    """Monitor series recomputed from every checkpoint in ``ckdir``, ordered by time."""
    files = sorted(ckdir.glob("*.mhdc"))
    if not files:
        raise CheckpointError(f"no checkpoints (*.mhdc) in {ckdir}")
    headers = sorted(((io.read_checkpoint_header(f), f) for f in files), key=lambda hf: hf[0].t)
    specs = (spec,) + tuple(d for d in DEFAULT_SPECS if d.kind != spec.kind)
    h0 = headers[0][0]
    series = MonitorSeries(specs, h0.nu, h0.eta)
    for h, f in headers:
        series.append(sample(io.read_checkpoint(f), None, specs, dealias))
    return series


def cmd_replay(args) -> int:
    spec = _spec(args.kind, args.alpha, args.beta)
    if not args.checkpoints.is_dir():
        raise UsageError(f"--checkpoints {args.checkpoints} is not a directory")
    series = replay_series(args.checkpoints, spec)
    out = args.out or args.checkpoints / "replay.csv"
    io.emit_monitor_csv(series, out)
    print(f"replayed {len(series)} checkpoints; M({series.samples[-1].t:g}) for {spec.label} = "
          f"{io.fmt(series.integrals[spec.label][-1])}; CSV written to {out}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "check-criteria": cmd_check_criteria,
    "verify-inequalities": cmd_verify,
    "replay": cmd_replay,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"mhdcrit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"mhdcrit: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidExponent as exc:
        print(f"mhdcrit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CheckpointError, OSError) as exc:
        print(f"mhdcrit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MHDError as exc:
        print(f"mhdcrit: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"mhdcrit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
