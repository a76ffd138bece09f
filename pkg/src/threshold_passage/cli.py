"""Command-line front end: ``threshold-passage <verb> ...``."""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .errors import PassageError
from .trap import SHAPES, TrapSpec, ZERO_RANGE


def _spec(args):
    width = None if args.shape == ZERO_RANGE else args.half_width
    return TrapSpec(args.shape, args.mass, args.energy, args.rate, width)


def _trap_args(p, energy=0.0, rate=1.0):
    p.add_argument("--shape", choices=SHAPES, default=ZERO_RANGE)
    p.add_argument("--energy", type=float, default=energy, help="offset E (E-bar or gamma in scaled units)")
    p.add_argument("--rate", type=float, default=rate, help="passage rate v")
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--half-width", type=float, default=0.5)
    p.add_argument("--state", type=int, default=0, help="initial even state m")


def _write_rows(path, header, names, rows):
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        for k, v in header.items():
            fh.write(f"# {k}={v}\n")
        w = csv.writer(fh)
        w.writerow(names)
        for r in rows:
            w.writerow(r)
    finally:
        if path:
            fh.close()


def cmd_sturmian(args):
    from .sturmian import RectangularBasis, ZeroRangeBasis

    basis = ZeroRangeBasis() if args.shape == ZERO_RANGE else RectangularBasis(tuple(range(args.channels)))
    omegas = np.linspace(args.omega_min, args.omega_max, args.points)
    rows = []
    for w in omegas:
        # the couplings diverge at the threshold itself; those entries become nan
        with np.errstate(invalid="ignore", divide="ignore"):
            pt = basis.at(w)
        row = [f"{w:.10g}"]
        for r in pt.rho:
            row += [f"{r.real:.12e}", f"{r.imag:.12e}"]
        for M in (pt.M1, pt.M2):
            for x in M.ravel():
                row += [f"{x.real:.12e}", f"{x.imag:.12e}"]
        rows.append(row)
    n = basis.n_channels
    names = ["omega"] + [f"{p}rho_{j}" for j in basis.labels for p in ("Re", "Im")]
    for M in ("M1", "M2"):
        names += [f"{p}{M}_{a}{b}" for a in basis.labels for b in basis.labels for p in ("Re", "Im")]
    _write_rows(args.output, {"shape": args.shape, "channels": n}, names, rows)
    return 0


def cmd_reflect(args):
    from .reflection import solve_coupled, solve_single_sturmian

    spec = _spec(args)
    if args.channels > 1:
        res = solve_coupled(spec, args.state, args.channels, wkb_tol=args.wkb_tol)
    else:
        res = solve_single_sturmian(spec, args.state, with_M2=not args.no_m2, wkb_tol=args.wkb_tol)
    rec = res.as_record(shape=args.shape, state=args.state, channels=args.channels)
    for k, v in rec.items():
        print(f"{k}={v}")
    return 0


def cmd_tdse(args):
    from .tdse import GridConfig, evolve

    cfg = GridConfig(refine=args.refine, time_refine=args.refine)
    trace, res = evolve(_spec(args), args.state, config=cfg, self_check=args.self_check)
    if args.output:
        trace.write_csv(args.output)
    for n in res.labels:
        print(f"P_{args.state}_{n}={res.probability(args.state, n):.10f}")
    print(f"final_norm={res.diagnostics['final_norm']:.10f}")
    return 0


def cmd_analytic(args):
    from .threshold import analytic_threshold_solution, universal_constant

    omegas = np.linspace(args.omega_min, args.omega_max, args.points)
    B = analytic_threshold_solution(omegas, args.rate, args.mass)
    rows = [[f"{w:.10g}", f"{b.real:.12e}", f"{b.imag:.12e}"] for w, b in zip(omegas, B)]
    _write_rows(args.output, {"rate": args.rate, "mass": args.mass,
                              "P_stay": f"{universal_constant():.15f}"},
                ["omega", "ReB", "ImB"], rows)
    return 0


def cmd_sweep(args):
    from .sweep import RunConfig, preset, run

    if args.preset:
        cfg = preset(args.preset, high_accuracy=args.high_accuracy)
    elif args.config:
        cfg = RunConfig.load(args.config)
    else:
        print("sweep needs --preset or --config", file=sys.stderr)
        return 2
    if args.workers:
        cfg.workers = args.workers
    if args.dump_config:
        print(cfg.to_yaml())
        return 0
    manifest = run(cfg, args.output)
    for f in manifest["files"]:
        print(f)
    return 0


def cmd_acceptance(args):
    from .acceptance import run_acceptance

    selected = [int(x) for x in args.only.split(",")] if args.only else None
    results = run_acceptance(selected, args.report)
    return 0 if all(r.passed for r in results) else 1


def build_parser():
    p = argparse.ArgumentParser(prog="threshold-passage",
                                description="Bound-state survival near the continuum threshold.")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("sturmian", help="dump rho_n(omega) and the coupling matrices")
    s.add_argument("--shape", choices=("zero_range", "rectangular"), default="rectangular")
    s.add_argument("--channels", type=int, default=3)
    s.add_argument("--omega-min", type=float, default=-5.0)
    s.add_argument("--omega-max", type=float, default=5.0)
    s.add_argument("--points", type=int, default=100)
    s.add_argument("--output")
    s.set_defaults(func=cmd_sturmian)

    s = sub.add_parser("reflect", help="Sturmian reflection solve")
    _trap_args(s)
    s.add_argument("--channels", type=int, default=1)
    s.add_argument("--no-m2", action="store_true", help="drop the diagonal M2 term (single channel)")
    s.add_argument("--wkb-tol", type=float, default=5e-4)
    s.set_defaults(func=cmd_reflect)

    s = sub.add_parser("tdse", help="direct time-dependent solve with population trace")
    _trap_args(s)
    s.add_argument("--refine", type=float, default=1.0)
    s.add_argument("--self-check", action="store_true")
    s.add_argument("--output", help="trace CSV path")
    s.set_defaults(func=cmd_tdse)

    s = sub.add_parser("analytic", help="exact E = 0 zero-range amplitude")
    s.add_argument("--rate", type=float, default=1.0)
    s.add_argument("--mass", type=float, default=1.0)
    s.add_argument("--omega-min", type=float, default=-10.0)
    s.add_argument("--omega-max", type=float, default=5.0)
    s.add_argument("--points", type=int, default=151)
    s.add_argument("--output")
    s.set_defaults(func=cmd_analytic)

    s = sub.add_parser("sweep", help="parameter sweeps from a preset or YAML config")
    s.add_argument("--preset", choices=("fig3", "fig4", "fig8", "fig10a", "fig10b"))
    s.add_argument("--config", help="YAML run configuration")
    s.add_argument("--output", help="output directory (overrides the config)")
    s.add_argument("--workers", type=int)
    s.add_argument("--high-accuracy", action="store_true")
    s.add_argument("--dump-config", action="store_true", help="print the YAML and exit")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("acceptance", help="run the acceptance suite")
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.add_argument("--report", help="JSON report path")
    s.set_defaults(func=cmd_acceptance)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PassageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
