"""Command-line front end.

    llg-wire stationary --h0 0.1 --L 15 --dx 0.2 --out profile.csv
    llg-wire spectrum   --h0 0.1 --op L2 --k 4 --out spec.csv
    llg-wire perturb    --h0 0.1 --eps0 0.1 --direction explicit --out m0.csv
    llg-wire evolve     --h0 0.1 --t-end 1 --init builtin:0.1 --out run/
    llg-wire fit-gauge  --h0 0.1 --state snap.csv
    llg-wire run        --scenario fig3 --out runs/fig3
    llg-wire run        --manifest runs/fig3/manifest.json --out runs/fig3_rerun
    llg-wire suite      --all --out results/
    llg-wire escape     --h0 0.1 --eps 0.2,0.1,0.05,0.025 --out results/escape

Exit codes: 0 success, 2 usage error, 3 solver blow-up.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import BlowUpError, SimulationConfig, evolve
from .grid import MagnetizationField, make_grid, read_field_csv, write_field_csv
from .modulation import fit_gauge, orbital_distance
from .perturbation import PerturbationSpec, build_initial_data, energy_gap
from .scenarios import (
    BUILTIN_SCENARIOS,
    SWEEP_H0_NEGATIVE,
    SWEEP_H0_POSITIVE,
    Scenario,
    escape_time_vs_bound,
    run_from_manifest,
    run_scenario,
    sweep_stationary,
    write_series_csv,
)
from .spectral import build_operator, kernel_residual, linearized_spectrum, \
    lowest_eigenpairs
from .stationary import solve_theta, write_profile_csv

EXIT_BLOWUP = 3


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--L", type=float, default=15.0, help="half length (default 15)")
    p.add_argument("--dx", type=float, default=0.2, help="grid spacing (default 0.2)")


def _cmd_stationary(args) -> int:
    grid = make_grid(args.L, args.dx)
    sol = solve_theta(args.h0, grid, ode_tol=args.ode_tol)
    write_profile_csv(sol, args.out)
    print(f"h0={args.h0}: E_h0(w) = {sol.energy_total:.12g} -> {args.out}")
    return 0


def _cmd_spectrum(args) -> int:
    grid = make_grid(args.L, args.dx)
    sol = solve_theta(args.h0, grid)
    out = Path(args.out)
    if args.op == "lin":
        report = linearized_spectrum(sol, args.alpha, args.k)
        print(f"transpose-kernel residuals: "
              f"{report.kernel_residuals[0]:.3e}, {report.kernel_residuals[1]:.3e}")
        print(f"eigenvalues with negative real part (reported, not asserted): "
              f"{report.negative_real_count}")
    else:
        op = build_operator(sol, args.op)
        report = lowest_eigenpairs(op, args.k)
        dth = sol.dtheta
        sth = dataclasses.replace(dth, values=np.sin(sol.theta.values))
        print(f"kernel residuals: (L1,dtheta)={kernel_residual(build_operator(sol, 'L1'), dth):.3e} "
              f"(L2,sin theta)={kernel_residual(build_operator(sol, 'L2'), sth):.3e}")
    with open(out, "w") as fh:
        fh.write("index,eigenvalue_re,eigenvalue_im\n")
        for i, lam in enumerate(np.atleast_1d(report.eigenvalues)):
            fh.write(f"{i},{complex(lam).real:.17g},{complex(lam).imag:.17g}\n")
    for i, f in enumerate(report.eigenfunctions):
        write_field_csv(out.with_name(out.stem + f"_vec{i}.csv"), f)
    print(f"eigenvalues: {np.round(np.atleast_1d(report.eigenvalues), 6)} -> {out}")
    return 0


def _cmd_perturb(args) -> int:
    grid = make_grid(args.L, args.dx)
    sol = solve_theta(args.h0, grid)
    m0 = build_initial_data(sol, PerturbationSpec(args.eps0, args.direction))
    write_field_csv(args.out, m0)
    gap = energy_gap(sol, m0)
    meta = {"h0": args.h0, "eps0": args.eps0, "direction": args.direction,
            "energy_gap": gap, "package_version": __version__}
    meta_path = Path(args.out).with_suffix(".json")
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    print(f"energy gap {gap:.6e} (< 0: admissible) -> {args.out}, {meta_path}")
    return 0


def _cmd_evolve(args) -> int:
    grid = make_grid(args.L, args.dx)
    if args.init.startswith("builtin:"):
        h0_init = float(args.init.split(":", 1)[1])
        sol = solve_theta(h0_init, grid)
        m0 = MagnetizationField(grid, sol.w.values.copy())
    else:
        field = read_field_csv(args.init)
        if not isinstance(field, MagnetizationField):
            print(f"error: {args.init} is not a magnetization file", file=sys.stderr)
            return 2
        m0 = field
    cfg = SimulationConfig(grid=grid, h0=args.h0, alpha=args.alpha,
                           dt=args.dt, t_end=args.t_end,
                           record_every=args.record_every)
    snaps = tuple(float(s) for s in args.snapshots.split(",")) if args.snapshots else ()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        record = evolve(m0, cfg, snapshot_times=snaps)
    except BlowUpError as exc:
        write_field_csv(out / "last_good.csv", exc.last_good)
        print(f"blow-up: {exc} (last good state -> {out/'last_good.csv'})",
              file=sys.stderr)
        return EXIT_BLOWUP
    write_series_csv(record, out / "series.csv")
    for t, snap in sorted(record.snapshots.items()):
        write_field_csv(out / f"snap_t{t:g}.csv", snap)
    manifest = {"h0": args.h0, "alpha": args.alpha, "L": args.L, "dx": args.dx,
                "dt": args.dt, "t_end": args.t_end, "init": args.init,
                "record_every": args.record_every,
                "package_version": __version__}
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    print(f"E: {record.total[0]:.6f} -> {record.total[-1]:.6f}  ({out})")
    return 0


def _cmd_fit_gauge(args) -> int:
    grid = make_grid(args.L, args.dx)
    sol = solve_theta(args.h0, grid)
    field = read_field_csv(args.state)
    if not isinstance(field, MagnetizationField):
        print(f"error: {args.state} is not a magnetization file", file=sys.stderr)
        return 2
    try:
        g, eta = fit_gauge(sol, field)
        from .grid import h1_norm
        print(f"gauge: y = {g.y:.9g}, phi = {g.phi:.9g}, "
              f"||eta||_H1 = {h1_norm(eta, grid.dx):.6e}")
    except RuntimeError as exc:
        dist, g = orbital_distance(sol, field)
        print(f"{exc}\nfallback orbital distance: {dist:.6e} at "
              f"y = {g.y:.6g}, phi = {g.phi:.6g}")
    return 0


def _parse_override(scenario: Scenario, overrides: list[str]) -> Scenario:
    fields = {f.name: f for f in dataclasses.fields(Scenario)}
    changes = {}
    for item in overrides:
        key, _, raw = item.partition("=")
        if key not in fields:
            raise SystemExit(f"unknown scenario field {key!r}")
        typ = fields[key].type
        if key == "snapshot_times":
            changes[key] = tuple(float(v) for v in raw.split(",") if v)
        elif typ in ("float", float):
            changes[key] = float(raw)
        elif typ in ("int", int):
            changes[key] = int(raw)
        elif typ in ("bool", bool):
            changes[key] = raw.lower() in ("1", "true", "yes")
        else:
            changes[key] = raw
    return dataclasses.replace(scenario, **changes)


def _cmd_run(args) -> int:
    try:
        if args.manifest:
            record, verdict = run_from_manifest(args.manifest, out_dir=args.out)
        else:
            scenario = BUILTIN_SCENARIOS.get(args.scenario)
            if scenario is None:
                print(f"unknown scenario {args.scenario!r}; builtins: "
                      f"{', '.join(BUILTIN_SCENARIOS)}", file=sys.stderr)
                return 2
            scenario = _parse_override(scenario, args.override or [])
            record, verdict = run_scenario(scenario, out_dir=args.out)
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    print(json.dumps(verdict, indent=2, sort_keys=True))
    return 0


def _cmd_suite(args) -> int:
    out = Path(args.out)
    names = list(BUILTIN_SCENARIOS) if args.all else args.scenarios
    sweep_stationary(SWEEP_H0_POSITIVE, out_dir=out / "fig1")
    sweep_stationary(SWEEP_H0_NEGATIVE, out_dir=out / "fig2")
    print(f"profile sweeps -> {out/'fig1'}, {out/'fig2'}")
    failures = 0
    for name in names:
        try:
            _, verdict = run_scenario(BUILTIN_SCENARIOS[name], out_dir=out / name)
        except BlowUpError as exc:
            print(f"{name}: blow-up: {exc}", file=sys.stderr)
            failures += 1
            continue
        print(f"{name}: {verdict['verdict']}")
        if verdict["verdict"] == "fail":
            failures += 1
    return EXIT_BLOWUP if failures else 0


def _cmd_escape(args) -> int:
    eps = tuple(float(v) for v in args.eps.split(","))
    table = escape_time_vs_bound(h0=args.h0, eps_list=eps, alpha=args.alpha,
                                 eps_op=args.eps_op, out_dir=args.out)
    print(f"{'eps0':>8} {'gap':>12} {'t*':>8} {'lambda':>8} {'R^2':>8} {'bound':>8}")
    for r in table["reports"]:
        t_star = f"{r.escape_time:8.3f}" if r.escape_time is not None else "    none"
        print(f"{r.epsilon0:8.3g} {r.energy_gap0:12.4e} {t_star} "
              f"{r.lam:8.4f} {r.r_squared:8.5f} {r.bound_time:8.3f}")
    print(f"shifts between halvings: {[round(s, 3) for s in table['shifts']]} "
          f"(exponential model: {table['predicted_shift']:.3f})")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="llg-wire",
        description="1-D Landau-Lifshitz-Gilbert toolkit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stationary", help="compute a stationary profile")
    p.add_argument("--h0", type=float, required=True)
    _add_grid_args(p)
    p.add_argument("--ode-tol", type=float, default=1e-10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stationary)

    p = sub.add_parser("spectrum", help="diagonalize a second-variation block")
    p.add_argument("--h0", type=float, required=True)
    p.add_argument("--op", choices=("L1", "L2", "lin"), required=True)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--alpha", type=float, default=1.0)
    _add_grid_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("perturb", help="energy-lowering initial data")
    p.add_argument("--h0", type=float, required=True)
    p.add_argument("--eps0", type=float, required=True)
    p.add_argument("--direction", choices=("explicit", "eigen"), default="explicit")
    _add_grid_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser("evolve", help="run the explicit scheme")
    p.add_argument("--h0", type=float, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    _add_grid_args(p)
    p.add_argument("--dt", type=float, default=5e-5)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--record-every", type=int, default=2000)
    p.add_argument("--init", required=True,
                   help="field CSV or builtin:<h0> for a stationary profile")
    p.add_argument("--snapshots", default="", help="comma-separated times")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("fit-gauge", help="fit the gauge of a snapshot")
    p.add_argument("--h0", type=float, required=True)
    _add_grid_args(p)
    p.add_argument("--state", required=True, help="magnetization CSV")
    p.set_defaults(func=_cmd_fit_gauge)

    p = sub.add_parser("run", help="run a named scenario")
    p.add_argument("--scenario", default=None)
    p.add_argument("--manifest", default=None)
    p.add_argument("--override", action="append", metavar="key=val")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("suite", help="run scenario suites")
    p.add_argument("--all", action="store_true")
    p.add_argument("--scenarios", nargs="*", default=())
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_suite)

    p = sub.add_parser("escape", help="escape-time vs amplitude table")
    p.add_argument("--h0", type=float, default=0.1)
    p.add_argument("--eps", default="0.2,0.1,0.05,0.025")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--eps-op", type=float, default=0.8)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_escape)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
