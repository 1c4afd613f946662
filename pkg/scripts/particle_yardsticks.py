"""Why the i.i.d. error bar is the wrong ruler for coupled particle means.

Runs the interacting particle ensemble against the kinetic solver and
prints, per spatial cell and checkpoint, the gap between the empirical
voltage mean and the kinetic mean measured two ways: in units of the
naive standard error std/sqrt(n_cell), and in units of the fluctuation
band obtained by linearizing the finite-n mean dynamics around the limit
trajectory.

The pairwise coupling conserves each cell's empirical mean exactly, so
the mean is not an average of n fresh draws: it accumulates Brownian
kicks of size sqrt(2/n_cell) and inflates wherever the local drift
slope N'(V) is positive.  By t of order one the naive bar is too tight
by roughly an order of magnitude while the band stays calibrated.  Both
counters are also written to particle_manifest.json.

    python3 scripts/particle_yardsticks.py --n 2000
    python3 scripts/particle_yardsticks.py --n 8000 --epsilon 0.1 --seed 3
"""

import argparse

from fhnlab import harness


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--epsilon", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/particle_demo")
    args = ap.parse_args()

    config = harness.RunConfig({"seed": args.seed, "output_dir": args.out})
    summary = harness.run_particle_compare(config, args.epsilon, args.n, args.out)

    cols = harness.read_csv_columns(f"{args.out}/particle_compare.csv")
    print(f"n={args.n}  epsilon={args.epsilon}  seed={args.seed}\n")
    print(f"{'t':>6} {'node':>4} {'mean_v':>10} {'V_kinetic':>10} "
          f"{'naive se':>10} {'band se':>10} {'gap/naive':>10} {'gap/band':>9}")
    for r in range(len(cols["t"])):
        if cols["t"][r] == 0.0:
            continue
        print(f"{cols['t'][r]:>6.2f} {int(cols['node'][r]):>4}"
              f" {cols['mean_v'][r]:>10.5f} {cols['V_kinetic'][r]:>10.5f}"
              f" {cols['sem_v'][r]:>10.2e} {cols['fluct_se'][r]:>10.2e}"
              f" {cols['n_se'][r]:>10.2f} {cols['n_fse'][r]:>9.2f}")

    per = summary["n_checkpoints"]
    print(f"\ncheckpoints within 3 naive se, per node: "
          f"{summary['within_3se_per_node']} of {per}")
    print(f"checkpoints within 3 band se,  per node: "
          f"{summary['within_3fluct_per_node']} of {per}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
