#!/usr/bin/env python3
"""Regenerate every analytic artifact (download sweeps, request accounting,
op counts, storage projection) into one directory of CSV files.

Equivalent to running the fig4/fig5/resv-size/opcount/storage subcommands
with their defaults; kept as a script so the full artifact set is one
command: `python scripts/reproduce_figures.py --out artifacts/`.
"""

import argparse
import sys
from pathlib import Path

from parkpir.cli import cmd_fig4, cmd_fig5, cmd_opcount, cmd_resv_size, cmd_storage
from parkpir.overhead import SizeTable


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="artifacts", help="output directory")
    args = parser.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = SizeTable()

    with open(out / "fig4.csv", "w", newline="") as fh:
        cmd_fig4(44, [40 * i for i in range(1, 11)], table, stdout=fh)
    with open(out / "fig5.csv", "w", newline="") as fh:
        cmd_fig5(75, [5, 9, 14, 19, 24, 29, 34, 39, 44], table, stdout=fh)
    with open(out / "resv_size.csv", "w", newline="") as fh:
        cmd_resv_size(table, stdout=fh)
    with open(out / "opcount.csv", "w", newline="") as fh:
        cmd_opcount(stdout=fh)
    with open(out / "storage_year.csv", "w", newline="") as fh:
        cmd_storage(50, 39, blocks_per_day=144, days=365, stdout=fh)

    for name in sorted(p.name for p in out.iterdir()):
        print(f"wrote {out / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
