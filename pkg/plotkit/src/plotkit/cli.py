"""plot <kind> <run_dir>... -o out.png

Kinds:
    rate      log-log statistic vs epsilon with fitted and reference slopes
    profile   log-density slice vs its limiting parabola at the final time
    heatmap   (v, w) density field at the final time
    decay     centered second moment vs time with its decay envelope
    sandwich  super/sub-solution ordering gaps over time

Inputs are sweep directories, single run directories, or (for rate) CSV
files with eps/statistic columns.  Exit code 0 on success.
"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, render
from .readers import MissingColumn


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("sources", nargs="+", metavar="run_dir",
                        help="sweep dir, run dir, or rate-pairs CSV")
    parser.add_argument("-o", "--output", required=True)
    parser.add_argument("--node", type=int, default=None,
                        help="spatial node for profile/heatmap (default middle)")
    args = parser.parse_args(argv)

    spec = FigureSpec(run_dirs=tuple(args.sources), kind=args.kind,
                      output=args.output, node=args.node)
    try:
        report = render(spec)
    except (MissingColumn, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    extras = {k: v for k, v in report.items() if k not in ("kind", "output")}
    print(f"wrote {args.output}"
          + (f"  {extras}" if extras else ""))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
