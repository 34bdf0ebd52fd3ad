"""python -m llgplots profiles|run --in <path> --out <png>

profiles: --in is a directory of profile_*.csv files (or one profile CSV);
          renders the two-panel angle/m1 overlay.
run:      --in is a run directory (series.csv + snap_t*.csv); renders the
          m1 waterfall and the energy curve next to --out.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import plot_profiles, plot_run


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="llgplots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profiles", help="profile overlay figure")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="waterfall + energy figures for a run dir")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-curves", type=int, default=16)

    args = parser.parse_args(argv)
    inp = Path(args.inp)
    try:
        if args.command == "profiles":
            if inp.is_dir():
                files = sorted(inp.glob("profile_*.csv")) or sorted(inp.glob("*.csv"))
            else:
                files = [inp]
            out = plot_profiles(files, args.out)
            print(out)
        else:
            for out in plot_run(inp, args.out, args.max_curves):
                print(out)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
