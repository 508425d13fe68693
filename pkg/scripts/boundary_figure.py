#!/usr/bin/env python3
"""Emit the extraction-boundary figure data (CSV + SVG) for a config."""
import argparse
import pathlib
import sys

from regime_extract.cli import main as cli_main

HERE = pathlib.Path(__file__).resolve().parent


def run() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(HERE.parent/"configs"/"example.json"))
    ap.add_argument("--out", default="results/boundaries.csv")
    ap.add_argument("--grid", type=int, default=800)
    args = ap.parse_args()
    pathlib.Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    return cli_main(["boundary", "--config", args.config,
                     "--grid", str(args.grid), "--out", args.out, "--svg"])


if __name__ == "__main__":
    sys.exit(run())
