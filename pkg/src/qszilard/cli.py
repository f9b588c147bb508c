"""Batch command-line front end.

Subcommands: ``work`` (one cycle evaluation), ``scan`` (sweep temperature,
coupling or insertion), ``optimize`` (maximize over temperature and/or
insertion), ``cache`` (inspect/clear/prewarm the spectrum store).

Units on the wire are the reduced ones: temperatures as k_B T / E1,
couplings as g / g0, works as W / (k_B T ln 2).  Every output embeds the
fully resolved configuration and the code version, and identical
configuration plus cache state produces byte-identical tables.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import classical_work
from .cache import CACHE_DIR_ENV, SpectrumCache, default_cache_dir
from .cycle import (
    CyclePlan,
    find_peak,
    make_ensemble,
    optimize_insertion,
    optimize_removals,
    scan,
    work_total,
)
from .errors import QszilardError
from .spectrum import BasisControls
from .thermo import outcome_distribution
from .units import E1, EngineParams

LN2 = np.log(2.0)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        if np.isnan(x):
            return ""
        return f"{x:.12g}"
    return str(x)


def _parse_range(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must be lo:hi:count, got {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    count = int(parts[2])
    if count < 1:
        raise argparse.ArgumentTypeError("range count must be >= 1")
    return np.linspace(lo, hi, count)


def _read_config(path: str) -> list[str]:
    """Turn key=value lines into injected command-line arguments.

    Flags given on the real command line come later and therefore win.
    """
    injected: list[str] = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"config line is not key=value: {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "yes", "1") and key in ("opt-t", "opt_t"):
            injected.append(flag)
        else:
            injected.extend([flag, value])
    return injected


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of key=value lines; flags override")
    common.add_argument("--n", type=int, default=1, help="particle number N")
    common.add_argument("--g", type=float, default=0.0, help="coupling g/g0")
    common.add_argument("--t", type=float, help="temperature k_BT/E1")
    common.add_argument("--t-range", type=str, help="temperature sweep lo:hi:count (k_BT/E1)")
    common.add_argument("--g-range", type=str, help="coupling sweep lo:hi:count (g/g0)")
    common.add_argument("--ins", type=float, default=0.5, help="insertion position in (0,1)")
    common.add_argument("--ins-range", type=str, help="insertion sweep lo:hi:count")
    common.add_argument(
        "--baseline",
        choices=["exact", "ideal-bose", "ideal-fermi", "perturbative", "classical"],
        default="exact",
        help="partition-function backend",
    )
    common.add_argument("--modes", type=int, help="initial single-particle modes per subsystem")
    common.add_argument("--e-cut", type=float, help="Fock energy cutoff in units of E1 (unit box)")
    common.add_argument("--tol", type=float, help="|d lnZ| basis-convergence tolerance")
    common.add_argument("--rem-grid", type=int, default=101, help="removal search grid points")
    common.add_argument("--out", help="write the result table to this path")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--cache-dir", help=f"spectrum cache directory (default ${CACHE_DIR_ENV})")

    parser = argparse.ArgumentParser(
        prog="qszilard",
        description="Cycle work of a measurement-driven engine for bosons in a 1D box",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("work", parents=[common], help="evaluate one cycle")
    scan_p = sub.add_parser("scan", parents=[common], help="sweep one axis")
    scan_p.add_argument("--opt-t", action="store_true", help="re-optimize T at every coupling")
    opt_p = sub.add_parser("optimize", parents=[common], help="maximize the work output")
    opt_p.add_argument("--ins-free", action="store_true", help="optimize the insertion position")
    cache_p = sub.add_parser("cache", parents=[common], help="manage the spectrum store")
    cache_p.add_argument("action", choices=["inspect", "clear", "prewarm"])
    return parser


def _controls(args) -> BasisControls:
    kwargs = {}
    if args.modes is not None:
        kwargs["n_modes"] = args.modes
    if args.e_cut is not None:
        kwargs["energy_cutoff"] = args.e_cut * E1
    if args.tol is not None:
        kwargs["z_tol"] = args.tol
    return BasisControls(**kwargs)


def _cache(args) -> SpectrumCache:
    directory = args.cache_dir or default_cache_dir()
    return SpectrumCache(directory)


def _resolved_config(args) -> dict:
    skip = {"command", "config", "out"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}
    cfg["version"] = __version__
    return cfg


def _columns(n_particles: int) -> list[str]:
    return (
        ["value", "t_e1", "ratio", "w_insert", "w_expand", "w_remove", "w_total", "info"]
        + [f"p{n}" for n in range(n_particles + 1)]
        + [f"rem{n}" for n in range(n_particles + 1)]
        + ["converged", "note"]
    )


def _row(value: float, t_e1: float, breakdown, n_particles: int, note: str | None = None) -> dict:
    row = {"value": value, "t_e1": t_e1, "note": note or ""}
    if breakdown is None:
        for col in _columns(n_particles):
            row.setdefault(col, np.nan)
        row["converged"] = False
        return row
    row.update(
        ratio=breakdown.ratio,
        w_insert=breakdown.w_insert,
        w_expand=breakdown.w_expand,
        w_remove=breakdown.w_remove,
        w_total=breakdown.w_total,
        info=breakdown.info,
        converged=breakdown.converged,
    )
    for n, p in enumerate(breakdown.probabilities):
        row[f"p{n}"] = p
    for n, r in enumerate(breakdown.plan.removals):
        row[f"rem{n}"] = r
    return row


def _render(rows: list[dict], config: dict, n_particles: int, fmt: str) -> str:
    cols = _columns(n_particles)
    if fmt == "json":
        payload = {
            "config": {k: _fmt(v) for k, v in config.items()},
            "columns": cols,
            "rows": [{c: _fmt(r.get(c, "")) for c in cols} for r in rows],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    for key, val in config.items():
        buf.write(f"# {key}={_fmt(val)}\n")
    writer = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({c: _fmt(r.get(c, "")) for c in cols})
    return buf.getvalue()


def _emit(text: str, args):
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)


def _params(args, t_e1: float | None = None) -> EngineParams:
    t = t_e1 if t_e1 is not None else args.t
    if t is None:
        raise SystemExit("a temperature is required (--t or --t-range)")
    return EngineParams.from_reduced(args.n, args.g, t)


def cmd_work(args) -> int:
    cache = _cache(args)
    params = _params(args)
    ens = make_ensemble(params, args.baseline, _controls(args), cache)
    plan = optimize_removals(ens, insertion=args.ins, grid_points=args.rem_grid)
    breakdown = work_total(plan, ens)
    config = _resolved_config(args)
    for key, val in config.items():
        print(f"# {key}={_fmt(val)}")
    print(f"ratio          = {breakdown.ratio:.6f}")
    print(f"w_total (kT)   = {_fmt(breakdown.w_total)}")
    print(f"w_insert (kT)  = {_fmt(breakdown.w_insert)}")
    print(f"w_expand (kT)  = {_fmt(breakdown.w_expand)}")
    print(f"w_remove (kT)  = {_fmt(breakdown.w_remove)}")
    print(f"info (nats)    = {_fmt(breakdown.info)}")
    print(f"p_n            = {' '.join(_fmt(p) for p in breakdown.probabilities)}")
    print(f"removals       = {' '.join(_fmt(r) for r in plan.removals)}")
    print(f"converged      = {_fmt(breakdown.converged)}")
    if args.out:
        rows = [_row(args.ins, params.temperature_e1, breakdown, args.n)]
        _emit(_render(rows, config, args.n, args.format), args)
    if not breakdown.converged:
        print("convergence failure: basis growth exhausted; see --tol/--modes", file=sys.stderr)
        return 2
    return 0


def cmd_scan(args) -> int:
    cache = _cache(args)
    controls = _controls(args)
    ranges = [r for r in (args.t_range, args.g_range, args.ins_range) if r]
    if len(ranges) != 1:
        raise SystemExit("scan needs exactly one of --t-range, --g-range, --ins-range")
    rows: list[dict] = []
    n_ok = 0
    if args.t_range:
        values = _parse_range(args.t_range)
        points = scan(
            _params(args, values[0]),
            "temperature",
            values * E1,
            kind=args.baseline,
            insertion=args.ins,
            controls=controls,
            cache=cache,
            removal_kwargs={"grid_points": args.rem_grid},
        )
        for v, pt in zip(values, points):
            rows.append(_row(v, v, pt.breakdown, args.n, pt.error))
            n_ok += pt.converged
    elif args.g_range:
        values = _parse_range(args.g_range)
        if args.opt_t:
            for g in values:
                try:
                    peak = find_peak(
                        EngineParams.from_reduced(args.n, g, 1.0),
                        coupling=g,
                        kind=args.baseline,
                        insertion=args.ins,
                        controls=controls,
                        cache=cache,
                        grid_points=args.rem_grid,
                    )
                    rows.append(_row(g, peak.temperature_e1, peak.breakdown, args.n))
                    n_ok += peak.breakdown.converged
                except QszilardError as exc:
                    rows.append(_row(g, np.nan, None, args.n, str(exc)))
        else:
            points = scan(
                _params(args),
                "coupling",
                values,
                kind=args.baseline,
                insertion=args.ins,
                controls=controls,
                cache=cache,
                removal_kwargs={"grid_points": args.rem_grid},
            )
            for v, pt in zip(values, points):
                rows.append(_row(v, args.t, pt.breakdown, args.n, pt.error))
                n_ok += pt.converged
    else:
        values = _parse_range(args.ins_range)
        points = scan(
            _params(args),
            "insertion",
            values,
            kind=args.baseline,
            insertion=args.ins,
            controls=controls,
            cache=cache,
            removal_kwargs={"grid_points": args.rem_grid},
        )
        for v, pt in zip(values, points):
            rows.append(_row(v, args.t, pt.breakdown, args.n, pt.error))
            n_ok += pt.converged
    _emit(_render(rows, _resolved_config(args), args.n, args.format), args)
    return 0 if n_ok >= 0.9 * len(rows) else 3


def cmd_optimize(args) -> int:
    cache = _cache(args)
    controls = _controls(args)
    config = _resolved_config(args)

    if args.baseline == "classical" and not args.ins_free and not args.t_range:
        # closed-form classical optimum over the insertion point
        from .baselines import classical_optimum

        x, w = classical_optimum(args.n)
        print(f"# baseline=classical n={args.n} version={__version__}")
        print(f"insertion* = {x:.6f}")
        print(f"ratio      = {w / LN2:.6f}")
        return 0

    if args.ins_free and args.t_range:
        # per-temperature insertion optimization: bifurcation table
        values = _parse_range(args.t_range)
        rows = []
        for t_e1 in values:
            params = _params(args, t_e1)
            ens = make_ensemble(params, args.baseline, controls, cache)
            opt = optimize_insertion(ens, removal_kwargs={"grid_points": args.rem_grid})
            row = _row(t_e1, t_e1, opt.breakdown, args.n)
            row["value"] = t_e1
            row["note"] = "maxima=" + ";".join(
                f"{x:.6f}:{w / LN2:.6f}" for x, w in opt.maxima
            )
            rows.append(row)
        _emit(_render(rows, config, args.n, args.format), args)
        return 0

    if args.ins_free:
        params = _params(args)
        ens = make_ensemble(params, args.baseline, controls, cache)
        opt = optimize_insertion(ens, removal_kwargs={"grid_points": args.rem_grid})
        row = _row(opt.plan.insertion, params.temperature_e1, opt.breakdown, args.n)
        row["note"] = "maxima=" + ";".join(f"{x:.6f}:{w / LN2:.6f}" for x, w in opt.maxima)
        _emit(_render([row], config, args.n, args.format), args)
        return 0 if opt.breakdown.converged else 2

    # temperature optimization at fixed insertion
    if args.t_range:
        values = _parse_range(args.t_range)
        best = None
        for t_e1 in values:
            params = _params(args, t_e1)
            ens = make_ensemble(params, args.baseline, controls, cache)
            plan = optimize_removals(
                ens, insertion=args.ins, grid_points=args.rem_grid, refine="parabolic"
            )
            wb = work_total(plan, ens)
            if best is None or wb.ratio > best[1]:
                best = (t_e1, wb.ratio)
        from .search import golden_max

        lo = max(values[0], best[0] - np.diff(values).mean())
        hi = min(values[-1], best[0] + np.diff(values).mean()) if len(values) > 1 else best[0]

        def ratio_at(t_e1: float) -> float:
            params = _params(args, t_e1)
            ens = make_ensemble(params, args.baseline, controls, cache)
            plan = optimize_removals(
                ens, insertion=args.ins, grid_points=args.rem_grid, refine="parabolic"
            )
            return work_total(plan, ens).ratio

        t_best, _ = golden_max(ratio_at, lo, hi, 1e-3) if len(values) > 1 else (best[0], best[1])
    else:
        peak = find_peak(
            _params(args, 1.0),
            coupling=args.g,
            kind=args.baseline,
            insertion=args.ins,
            controls=controls,
            cache=cache,
            grid_points=args.rem_grid,
        )
        t_best = peak.temperature_e1

    params = _params(args, t_best)
    ens = make_ensemble(params, args.baseline, controls, cache)
    plan = optimize_removals(ens, insertion=args.ins, grid_points=args.rem_grid)
    breakdown = work_total(plan, ens)
    row = _row(t_best, t_best, breakdown, args.n)
    _emit(_render([row], config, args.n, args.format), args)
    return 0 if breakdown.converged else 2


def cmd_cache(args) -> int:
    cache = _cache(args)
    if args.action == "inspect":
        print(f"# store={cache.store_path or '(memory only)'}")
        print(f"entries = {len(cache)}")
        for key in cache.keys():
            rec = cache.get(key)
            print(
                f"n={key.n} g_eff={_fmt(key.g_eff)} modes={key.n_modes} "
                f"e_cut={_fmt(key.energy_cutoff)} levels={rec.k} dim={rec.dim}"
            )
        return 0
    if args.action == "clear":
        cache.clear()
        print("entries = 0")
        return 0
    # prewarm: compute every spectrum a removal-grid sweep would touch
    if args.t is None and not args.t_range:
        raise SystemExit("prewarm needs --t or --t-range")
    t_max = max(_parse_range(args.t_range)) if args.t_range else args.t
    params = _params(args, t_max)
    ens = make_ensemble(params, args.baseline, _controls(args), cache)
    for ell in np.linspace(0.0, 1.0, args.rem_grid):
        outcome_distribution(ens, ell)
    ens.full_log_z()
    print(f"entries = {len(cache)}")
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # inject config-file values ahead of explicit flags (flags override)
    if "--config" in argv:
        path = argv[argv.index("--config") + 1]
        head = argv[:1]
        injected = _read_config(path)
        argv = head + injected + argv[1:]
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "work":
            return cmd_work(args)
        if args.command == "scan":
            return cmd_scan(args)
        if args.command == "optimize":
            return cmd_optimize(args)
        return cmd_cache(args)
    except QszilardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
