#!/usr/bin/env python3
"""Run the built-in worked examples back to back.

Thin wrapper over the CLI so the output matches `gibbsfit demo ...`
exactly; handy for eyeballing all three reports after a change.
"""

import argparse
import sys

from gibbsfit.cli import run

DEMOS = ("wolf", "qubit", "thermal")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--format", choices=("table", "json"), default="table")
    ap.add_argument("--only", choices=DEMOS, help="run a single example")
    args = ap.parse_args()

    for which in (args.only,) if args.only else DEMOS:
        rc = run(["demo", which, "--format", args.format])
        if rc != 0:
            return rc
        print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
