"""Command-line entry points; every subcommand is a thin harness call.

    fhnlab validate     <config.json>
    fhnlab kinetic-run  <config.json> [--epsilon E] [--output DIR]
    fhnlab macro-run    <config.json> [--output DIR]
    fhnlab particle-run <config.json> [--epsilon E] [--n N] [--output DIR]
    fhnlab sweep-eps    <config.json> [--output DIR]
    fhnlab verify       <run_or_sweep_dir>
    fhnlab fit-rate     <pairs.csv> [--x eps] [--y statistic]

Exit code 0 means every requested check passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness, macro_limit
from .model import validate_rho0


def _load(path: str) -> harness.RunConfig:
    return harness.RunConfig.from_file(path)


def cmd_validate(args) -> int:
    config = _load(args.config)
    eps = config.raw["sweep"][0]
    checks = config.params(eps).validate()
    rho0 = config.rho0()
    checks += validate_rho0(rho0, config.raw["model"]["m_star"])
    grid = config.grid()
    ok = all(c.ok for c in checks)
    for c in checks:
        print(f"[{'PASS' if c.ok else 'FAIL'}] {c.name}: {c.detail}")
    print(f"[INFO] grid: {json.dumps(grid.manifest())}")
    return 0 if ok else 1


def cmd_kinetic_run(args) -> int:
    config = _load(args.config)
    if args.sandwich:
        config.raw["sandwich"] = True
    eps = args.epsilon if args.epsilon is not None else config.raw["sweep"][0]
    out = Path(args.output or config.raw["output_dir"]) / harness.eps_dirname(eps)
    manifest = harness.run_single(config, eps, out)
    print(f"{manifest['status']}: {out}")
    if manifest["status"] != "ok":
        print(manifest["error"], file=sys.stderr)
        return 1
    return 0


def cmd_macro_run(args) -> int:
    config = _load(args.config)
    eps = config.raw["sweep"][0]
    params = config.params(eps)
    rho0 = config.rho0()
    psi = config.psi_matrix(rho0)
    sched = config.raw["schedule"]
    traj = macro_limit.integrate(params, rho0, psi, config.v0(rho0),
                                 config.w0(rho0), sched["t_end"])
    out = Path(args.output or config.raw["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    stride = sched["snapshot_stride"]
    times = np.arange(0.0, sched["t_end"] + 0.5 * stride, stride)
    rows = []
    for t in times:
        V, W = traj.at(t)
        for i in range(rho0.n_x):
            rows.append((t, i, V[i], W[i]))
    harness._write_csv(out / "macro_limit.csv", ["t", "node", "V", "W"], rows)
    print(f"ok: {out / 'macro_limit.csv'}")
    return 0


def cmd_particle_run(args) -> int:
    config = _load(args.config)
    eps = args.epsilon if args.epsilon is not None else config.raw["sweep"][0]
    out = Path(args.output or config.raw["output_dir"]) / f"particles_{harness.eps_dirname(eps)}"
    summary = harness.run_particle_compare(config, eps, args.n, out)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    config = _load(args.config)
    manifest = harness.run_sweep(config, args.output)
    bad = [m for m in manifest["members"] if m["status"] != "ok"]
    for m in manifest["members"]:
        print(f"eps={m['epsilon']:g}: {m['status']}"
              + (f" ({m['error']})" if m["error"] else ""))
    return 1 if bad else 0


def cmd_verify(args) -> int:
    ok, checks = harness.verify(args.directory)
    for line in checks:
        print(line.render())
    return 0 if ok else 1


def cmd_fit_rate(args) -> int:
    cols = harness.read_csv_columns(args.csv)
    for name in (args.x, args.y):
        if name not in cols:
            print(f"missing column {name!r} in {args.csv}", file=sys.stderr)
            return 1
    fit = harness.fit_rate(list(zip(cols[args.x], cols[args.y])))
    print(f"slope {fit.slope:.6g}  r2 {fit.r2:.6g}  n {len(fit.pairs)}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fhnlab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check config, drift, and spatial profile")
    p.add_argument("config")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("kinetic-run", help="run the kinetic solver for one epsilon")
    p.add_argument("config")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--output", default=None)
    p.add_argument("--sandwich", action="store_true",
                   help="evolve comparison envelopes alongside the density")
    p.set_defaults(fn=cmd_kinetic_run)

    p = sub.add_parser("macro-run", help="integrate the limit mean system")
    p.add_argument("config")
    p.add_argument("--output", default=None)
    p.set_defaults(fn=cmd_macro_run)

    p = sub.add_parser("particle-run", help="particle ensemble vs kinetic means")
    p.add_argument("config")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--output", default=None)
    p.set_defaults(fn=cmd_particle_run)

    p = sub.add_parser("sweep-eps", help="run every epsilon in the sweep")
    p.add_argument("config")
    p.add_argument("--output", default=None)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("verify", help="re-check a finished run or sweep directory")
    p.add_argument("directory")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("fit-rate", help="log-log slope of a two-column CSV")
    p.add_argument("csv")
    p.add_argument("--x", default="eps")
    p.add_argument("--y", default="statistic")
    p.set_defaults(fn=cmd_fit_rate)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
