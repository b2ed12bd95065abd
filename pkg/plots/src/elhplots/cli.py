"""Figure CLI: plot energy|drift|order|snapshot <inputs> -o <image>."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec
from .readers import FormatError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot", description="Figures from solver CSV/snapshot artifacts"
    )
    sub = parser.add_subparsers(dest="kind", required=True)

    p = sub.add_parser("energy", help="energy curves + integrated dissipation")
    p.add_argument("csv")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--yscale", choices=("linear", "log"), default="linear")

    p = sub.add_parser("drift", help="constraint-drift curves with guide line")
    p.add_argument("csv")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--yscale", choices=("linear", "log"), default="log")

    p = sub.add_parser("order", help="residual vs step size with fitted slope")
    p.add_argument("csvs", nargs="+")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("snapshot", help="director quiver over speed heatmap")
    p.add_argument("snap")
    p.add_argument("-o", "--output", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.kind == "order":
        inputs = list(args.csvs)
    elif args.kind == "snapshot":
        inputs = [args.snap]
    else:
        inputs = [args.csv]
    yscale = getattr(args, "yscale", "linear")
    try:
        slope = FigureSpec(inputs, args.kind, args.output, yscale).render()
        if slope is not None:
            print(f"fitted slope: {slope:.3f}")
    except (FormatError, ValueError, FileNotFoundError) as exc:
        print(exc, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
