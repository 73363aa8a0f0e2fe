"""decay_lab command line interface.

Subcommands: validate, profile, norm, evolve, kernel, decay.  All file
outputs are UTF-8 CSV with a header row plus a run manifest; report
subcommands also render PNG figures next to the CSV.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from math import inf
from pathlib import Path

import numpy as np

from . import plots
from .config import (_as_index, build_experiment, build_potential,
                     load_config, write_manifest)
from .decay import (corollary_rhs, gaussian_bound_report, measure_norm,
                    run_decay_experiment, theorem_rhs)
from .errors import HardyHeatError, ValidationFailure
from .heat import ModeSolver, initial_bump, kernel_envelope
from .lorentz import RadialField, lorentz_norm
from .potential import rayleigh_check, validate_condition_V
from .profile import fit_ck, solve_profile
from .spectrum import (admissible, check_null_critical_window,
                       mode_exponents)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_validate(args, cfg) -> int:
    spec = build_potential(cfg)
    status = 0
    try:
        validate_condition_V(spec)
        print(f"condition (V): PASS  [{spec.name}]")
    except ValidationFailure as exc:
        print(f"condition (V): FAIL  [{exc.clause} at r={exc.radius:g}: {exc}]")
        status = 1
    try:
        check_null_critical_window(spec)
        minimum, _ = rayleigh_check(spec)
        print(f"condition (N'): PASS  [min Rayleigh quotient {minimum:.3e}]")
    except HardyHeatError as exc:
        print(f"condition (N'): FAIL  [{exc}]")
        status = 1
    lz = cfg["lorentz"]
    p, q = _as_index(lz["p"]), _as_index(lz["q"])
    sigma, theta = _as_index(lz["sigma"]), _as_index(lz["theta"])
    ok = admissible(p, q, sigma, theta)
    print(f"condition (Lambda): {'PASS' if ok else 'FAIL'}  "
          f"[(p,q,sigma,theta)=({p},{q},{sigma},{theta})]")
    return status if ok else 1


def cmd_profile(args, cfg) -> int:
    spec = build_potential(cfg)
    out = _outdir(args)
    summary = {}
    for k in cfg["modes"]["k"]:
        prof = solve_profile(spec, int(k), r_max=args.r_max,
                             tol=args.tol or cfg["solver"]["profile_tol"])
        r = prof.grid
        v_plus = r**prof.exponents.small_r
        model = prof.large_r_model(r) if np.isfinite(prof.c_k) \
            else np.full_like(r, np.nan)
        rows = zip(r, prof.h, prof.dh, v_plus, model,
                   np.where(model != 0, prof.h / model, np.nan))
        path = out / f"profile_k{k}.csv"
        _write_csv(path, ["r", "h_k", "dh_k", "v_plus", "v_k", "ratio"], rows)
        summary[f"k={k}"] = {"c_k": prof.c_k,
                             "picard_ratio": prof.picard_ratio,
                             "picard_radius": prof.picard_radius,
                             "fit_residual": prof.fit_residual,
                             "small_r_exponent": prof.exponents.small_r,
                             "large_r_exponent": prof.exponents.large_r}
        if cfg["outputs"]["figures"]:
            plots.plot_profile(prof, out / f"profile_k{k}.png")
        print(f"k={k}: h ~ r^{prof.exponents.small_r:.4f} at 0, "
              f"c_k={prof.c_k:.6g}, wrote {path}")
    (out / "profile_summary.json").write_text(
        json.dumps(summary, indent=2), encoding="utf-8")
    write_manifest(out / "profile_manifest.txt", cfg,
                   {"subcommand": "profile", "r_max": args.r_max})
    return 0


def _field_from_spec(text, spec, cfg, args):
    kind, _, param = text.partition(":")
    grid = np.geomspace(1e-6, 1e3, 64 * 9 + 1)
    if kind == "power":
        a = float(param)
        return RadialField(grid, grid**a, spec.dim, "nodes", inner_exponent=a)
    if kind == "indicator":
        radius = float(param)
        g = np.geomspace(1e-6, radius, 200)
        return RadialField(g, np.ones(g.size - 1), spec.dim, "cells")
    if kind == "profile":
        k = int(param or 0)
        prof = solve_profile(spec, k, r_max=args.r_max)
        from .lorentz import profile_field
        return profile_field(prof)
    if kind == "csv":
        data = np.loadtxt(param, delimiter=",", comments="#")
        return RadialField(data[:, 0], data[:, 1], spec.dim, "nodes")
    raise ValueError(f"unknown field spec {text!r}")


def cmd_norm(args, cfg) -> int:
    spec = build_potential(cfg)
    field = _field_from_spec(args.field, spec, cfg, args)
    region = None
    if args.ball is not None:
        region = ("ball", args.ball)
    elif args.complement is not None:
        region = ("complement", args.complement)
    p = _as_index(args.p if args.p is not None else cfg["lorentz"]["p"])
    sigma = _as_index(args.sigma if args.sigma is not None
                      else cfg["lorentz"]["sigma"])
    value = lorentz_norm(field, p, sigma, region=region)
    print(f"||f||_L({p},{sigma}){'' if region is None else region} = {value:.10g}")
    if args.rearrangement:
        from .lorentz import decreasing_rearrangement
        star = decreasing_rearrangement(field)
        out = _outdir(args)
        path = out / "rearrangement.csv"
        _write_csv(path, ["s", "f_star"],
                   zip(star.breaks[:-1], star.heights))
        print(f"wrote {path}")
    return 0


def cmd_evolve(args, cfg) -> int:
    spec = build_potential(cfg)
    out = _outdir(args)
    exp = build_experiment(cfg, grid_scale=args.grid_scale, tol=args.tol)
    times = exp.times()
    for k in cfg["modes"]["k"]:
        prof = solve_profile(spec, int(k),
                             r_max=1.25 * 40.0 * math.sqrt(times[-1]),
                             tol=exp.profile_tol)
        solver = ModeSolver(prof, r_min=exp.r_min,
                            r_max=40.0 * math.sqrt(times[-1]),
                            nodes_per_decade=exp.nodes_per_decade)
        from .decay import build_initial_w
        w0 = build_initial_w(solver, exp)
        _, snaps = solver.evolve(w0, times, local_tol=exp.local_tol)
        h = prof.h_at(solver.centers)
        vs = []
        for t, w in zip(times, snaps):
            v = h * w
            dv = np.gradient(v, solver.centers)
            _write_csv(out / f"evolve_k{k}_t{t:g}.csv",
                       ["r", "v", "w", "dv_dr"],
                       zip(solver.centers, v, w, dv))
            vs.append(v)
        if cfg["outputs"]["figures"]:
            plots.plot_evolution(solver.centers, vs, times,
                                 out / f"evolve_k{k}.png")
        write_manifest(out / f"evolve_k{k}_manifest.txt", cfg,
                       {"subcommand": "evolve", "mode": k,
                        "cells": solver.centers.size,
                        "escaped_mass": solver.escaped_mass})
        print(f"k={k}: evolved {len(times)} snapshots on "
              f"{solver.centers.size} cells")
    return 0


def cmd_kernel(args, cfg) -> int:
    spec = build_potential(cfg)
    out = _outdir(args)
    report = gaussian_bound_report(
        spec, nodes_per_decade=max(
            4, int(round(cfg["solver"]["nodes_per_decade"] * args.grid_scale))))
    C = report["constant"]
    prof = solve_profile(spec, 0, r_max=1e3)
    solver = ModeSolver(prof, r_max=40.0)
    t, ry = 1.0, 1.0
    w0 = initial_bump(solver, ry, unit="mass")
    _, snaps = solver.evolve(w0, [t])
    kernel = prof.h_at(solver.centers) * snaps[0]
    bound = kernel_envelope(prof, solver.centers, ry, t, C)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, kernel / bound, np.nan)
    path = out / "kernel.csv"
    _write_csv(path, ["t", "x", "p", "bound", "ratio"],
               ((t, x, pv, bv, rv) for x, pv, bv, rv
                in zip(solver.centers, kernel, bound, ratio)))
    if cfg["outputs"]["figures"]:
        plots.plot_kernel(solver.centers, kernel, bound, t, out / "kernel.png")
    write_manifest(out / "kernel_manifest.txt", cfg,
                   {"subcommand": "kernel", **report})
    print(f"fitted Gaussian constant C={C:.4g} "
          f"(refined {report['constant_refined']:.4g}, "
          f"drift {report['relative_drift']:.2%}, "
          f"{'stable' if report['stable'] else 'NOT stable'})")
    print(f"wrote {path}")
    return 0 if report["stable"] else 1


def cmd_decay(args, cfg) -> int:
    out = _outdir(args)
    exp = build_experiment(cfg, grid_scale=args.grid_scale, tol=args.tol)
    report = run_decay_experiment(exp)
    path = out / "decay.csv"
    _write_csv(path, ["t", "measured", "thm_rhs", "cor_rhs",
                      "ratio_thm", "ratio_cor"], report.rows())
    if cfg["outputs"]["figures"]:
        plots.plot_decay(report, out / "decay.png")
    write_manifest(out / "decay_manifest.txt", cfg,
                   {"subcommand": "decay",
                    "alpha": report.fit_measured.alpha,
                    "beta": report.fit_measured.beta,
                    "ratio_max": report.ratio_max,
                    "trend_slope": report.trend_slope,
                    "passed": report.passed})
    print(f"measured decay {report.fit_measured.describe()}, "
          f"ratio max {report.ratio_max:.4g}, "
          f"trend {report.trend_slope:+.4f}/decade, "
          f"{'PASS' if report.passed else 'FAIL'}")
    for note in report.notes:
        print(f"note: {note}")
    print(f"wrote {path}")
    return 0 if report.passed else 1


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decay_lab",
        description="Heat-semigroup decay experiments for inverse-square "
                    "potentials")
    parser.add_argument("--config", default=None, help="YAML config path")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--grid-scale", type=float, default=1.0,
                        help="multiply grid resolution by this factor")
    parser.add_argument("--tol", type=float, default=None,
                        help="override profile solve tolerance")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for independent experiment batches")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", help="check conditions (V), (N'), admissibility")
    p = sub.add_parser("profile", help="build harmonic profiles h_k")
    p.add_argument("--r-max", type=float, default=1e4)
    p = sub.add_parser("norm", help="Lorentz norm of a radial field")
    p.add_argument("--field", required=True,
                   help="power:A | indicator:R | profile[:k] | csv:path")
    p.add_argument("--p", default=None)
    p.add_argument("--sigma", default=None)
    p.add_argument("--ball", type=float, default=None)
    p.add_argument("--complement", type=float, default=None)
    p.add_argument("--rearrangement", action="store_true",
                   help="also write the rearrangement CSV")
    sub.add_parser("evolve", help="evolve configured data mode by mode")
    sub.add_parser("kernel", help="Gaussian kernel-bound report")
    sub.add_parser("decay", help="decay-rate experiment and report")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "r_max"):
        args.r_max = 1e3
    try:
        cfg = load_config(args.config)
    except (OSError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    handler = {"validate": cmd_validate, "profile": cmd_profile,
               "norm": cmd_norm, "evolve": cmd_evolve,
               "kernel": cmd_kernel, "decay": cmd_decay}[args.command]
    try:
        return handler(args, cfg)
    except HardyHeatError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
