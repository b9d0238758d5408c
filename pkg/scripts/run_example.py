#!/usr/bin/env python3
"""Run the shipped example scenario end to end and print the summary.

Shorthand for `parkpir run --config configs/example_scenario.json`; the
trace, report, and summary land in the chosen output directory.
"""

import argparse
import sys
from pathlib import Path

from parkpir.cli import cmd_run

REPO = Path(__file__).resolve().parents[1]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--config", default=str(REPO / "configs" / "example_scenario.json")
    )
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default="out")
    args = parser.parse_args(argv)
    return cmd_run(args.config, args.seed, args.out)


if __name__ == "__main__":
    sys.exit(main())
