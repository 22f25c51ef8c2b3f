"""``render --fig figN --in a.csv [--in b.csv] --out figN.png``"""

from __future__ import annotations

import argparse
import sys

from .recipes import RecipeError, render


def _parser():
    parser = argparse.ArgumentParser(prog="figrender")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure from CSV inputs")
    p.add_argument("--fig", required=True, help="figure id, fig1..fig9")
    p.add_argument("--in", dest="inputs", action="append", required=True,
                   metavar="CSV", help="input table (repeatable)")
    p.add_argument("--out", required=True, help="output PNG path")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0].startswith("-") and argv[0] not in ("-h", "--help"):
        # invoked as the bare `render` script: the subcommand is implicit
        argv = ["render"] + argv
    args = _parser().parse_args(argv)
    try:
        path = render(args.fig, args.inputs, args.out)
    except RecipeError as exc:
        print(f"figrender: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"figrender: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
