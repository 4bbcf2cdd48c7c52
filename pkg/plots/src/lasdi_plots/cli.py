"""Command line driver.

    lasdi-plot --kind heatmap  --input runs/b4/heatmap.csv  --output b4.png
    lasdi-plot --kind sv-decay --input a/sv_decay.csv --input b/sv_decay.csv \
               --output decay.png

Exit codes: 0 success, 1 bad input (missing/malformed CSV), 2 usage.
"""

from __future__ import annotations

import argparse
import sys

from . import render
from .reader import CsvFormatError

KINDS = {
    "heatmap": render.plot_heatmap,
    "sv-decay": render.plot_sv_decay,
    "latent": render.plot_latent,
    "profile": render.plot_profile,
    "range-bars": render.plot_range_bars,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lasdi-plot", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--kind", required=True, choices=sorted(KINDS))
    p.add_argument("--input", required=True, action="append", metavar="CSV",
                   help="input CSV; repeatable for sv-decay overlays")
    p.add_argument("--output", required=True, metavar="PNG")
    p.add_argument("--title")
    p.add_argument("--xlabel")
    p.add_argument("--ylabel")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.kind != "sv-decay" and len(args.input) != 1:
        print(f"lasdi-plot: --kind {args.kind} takes exactly one --input",
              file=sys.stderr)
        return 2
    fn = KINDS[args.kind]
    source = args.input if args.kind == "sv-decay" else args.input[0]
    try:
        out = fn(source, args.output, title=args.title, xlabel=args.xlabel,
                 ylabel=args.ylabel)
    except (CsvFormatError, ValueError) as exc:
        print(f"lasdi-plot: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
