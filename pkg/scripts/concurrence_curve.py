"""Concurrence lower bound against |alpha|^2 for a preset, as CSV and SVG.

    python scripts/concurrence_curve.py --config paper --out results
"""

import argparse
from pathlib import Path

from micromacro.cli import cmd_sweep, write_outputs
from micromacro.config import load_config


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--config", default="paper")
    parser.add_argument("--out", default="results")
    args = parser.parse_args()

    table = cmd_sweep(load_config(args.config))
    paths = write_outputs(table, Path(args.out), "concurrence_curve", plot=True)
    print(f"zero crossing at |alpha|^2 = {table.meta['zero_crossing']}")
    for path in paths:
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
