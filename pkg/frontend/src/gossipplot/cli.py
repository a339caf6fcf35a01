"""Command line entry point.

    gossipplot <loss|staleness> --in <csv> --out <img> [--format png|svg]
"""

import argparse
import os
import sys

from gossipplot.errors import PlotError
from gossipplot.plots import plot_loss_panels, plot_staleness_scaling, save_figure

KINDS = {
    "loss": plot_loss_panels,
    "staleness": plot_staleness_scaling,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gossipplot",
        description="Render gossipsim CSV outputs as figures",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--in", dest="input", required=True, help="input CSV path")
        p.add_argument("--out", dest="output", required=True, help="output image path")
        p.add_argument("--format", choices=("png", "svg"),
                       help="image format; default inferred from --out extension")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format
    if fmt is None:
        ext = os.path.splitext(args.output)[1].lstrip(".").lower()
        fmt = ext if ext in ("png", "svg") else "png"
    try:
        fig = KINDS[args.kind](args.input)
        save_figure(fig, args.output, fmt)
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
