#!/usr/bin/env python3
"""Write the reference regret grid (CSV plus manifest) to a directory."""

import argparse

from bnsl.bench import ExperimentSpec, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/regret-table",
                    help="output directory (default: %(default)s)")
    args = ap.parse_args()
    manifest = run_experiment(ExperimentSpec(kind="regret-table"), args.out)
    print(f"{manifest['rows']} rows -> {args.out}/regret-table.csv")


if __name__ == "__main__":
    main()
