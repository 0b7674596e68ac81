"""Command line front end: ``seahaul-plot --kind ... --in DIR --out FILE``."""

from __future__ import annotations

import argparse
import sys

from . import figures
from .readers import SchemaError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seahaul-plot", description=__doc__)
    p.add_argument("--kind", required=True, choices=sorted(figures.KINDS))
    p.add_argument("--in", dest="in_path", required=True, help="campaign directory (or curves.csv for pl_curves)")
    p.add_argument("--out", required=True, help="output image file")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        figures.KINDS[args.kind](args.in_path, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
