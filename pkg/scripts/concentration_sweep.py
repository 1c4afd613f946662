"""Epsilon sweep of the kinetic solver with rate fits printed at the end.

Runs one kinetic simulation per epsilon, collects three statistics at the
final time (sup-norm deviation of the log-density from the limiting
parabola, sup gap between kinetic and limit means, centered second moment
plateau), and fits log-log slopes across the sweep.  All three should come
out close to 1: the concentration is linear in epsilon.

Typical use:

    python3 scripts/concentration_sweep.py --out runs/sweep_demo
    python3 scripts/concentration_sweep.py --n-v 96 --n-w 48 --sweep 0.1 0.05 0.025

The full default resolution (160 x 72, four epsilons) takes a few minutes.
"""

import argparse
from pathlib import Path

from fhnlab import harness


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", default="runs/sweep_demo")
    ap.add_argument("--n-v", type=int, default=160)
    ap.add_argument("--n-w", type=int, default=72)
    ap.add_argument("--sweep", type=float, nargs="+",
                    default=[0.1, 0.05, 0.025, 0.0125])
    args = ap.parse_args()

    config = harness.RunConfig({
        "grid": {"n_v": args.n_v, "n_w": args.n_w},
        "sweep": args.sweep,
        "output_dir": args.out,
        "dump_fields": "ends",
    })
    manifest = harness.run_sweep(config)
    print(f"sweep finished in {manifest['wall_time_s']:.1f} s")
    for m in manifest["members"]:
        print(f"  eps={m['epsilon']:<8g} {m['status']}"
              + (f"  ({m['error']})" if m["error"] else ""))

    # final-time statistics per member, straight from the CSVs
    print(f"\n{'eps':>8}  {'deviation_sup':>14}  {'macro_gap':>12}  {'d2_final':>12}")
    for m in manifest["members"]:
        if m["status"] != "ok":
            continue
        member = Path(args.out) / m["dir"]
        bound = harness.read_csv_columns(member / "theorem_bound.csv")
        macro = harness.read_csv_columns(member / "macro_compare.csv")
        d2 = harness.read_csv_columns(member / "d2_series.csv")
        t_end = bound["t"][-1]
        gap = abs(macro["V_eps"] - macro["V_limit"])[macro["t"] == t_end].max()
        d2_final = d2["d2"][d2["t"] == t_end].max()
        print(f"{m['epsilon']:>8g}  {bound['statistic'][-1]:>14.6e}"
              f"  {gap:>12.6e}  {d2_final:>12.6e}")

    ok, checks = harness.verify(args.out)
    print()
    for c in checks:
        print(c.render())
    print("\nverdict:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
