"""``gdlab-plot <kind> --in <paths> --out <image> [--format svg|png]``

Exit codes: 0 success, 2 usage or schema error.
"""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .render import KINDS, PlotJob, render

EXIT_OK = 0
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gdlab-plot", description=__doc__)
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--in", dest="inputs", nargs="+", required=True, help="input CSV/JSON files")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--format", choices=["svg", "png"], default="png")
    p.add_argument("--title", default="")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        job = PlotJob(
            kind=args.kind,
            inputs=tuple(args.inputs),
            output=args.out,
            fmt=args.format,
            title=args.title,
        )
        render(job)
    except (SchemaError, ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
