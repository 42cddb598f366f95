"""Command line: ``retaincal-plots render --spec figures.json --out figures/``."""

from __future__ import annotations

import argparse
import sys

from .render import SchemaError, render
from .spec import SpecError, load_spec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retaincal-plots", description="Render sweep summary CSVs into figures."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render every figure in a spec file")
    p_render.add_argument("--spec", required=True, help="JSON figure specification")
    p_render.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        figures = load_spec(args.spec)
        written = render(figures, args.out)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    except (SchemaError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
