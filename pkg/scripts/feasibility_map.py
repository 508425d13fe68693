#!/usr/bin/env python3
"""Rasterize the feasibility region of the solvability conditions over a
volatility rectangle (CSV + SVG)."""
import argparse
import pathlib
import sys

from regime_extract.cli import main as cli_main


def run() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rho", type=float, default=0.03)
    ap.add_argument("--lambda1", type=float, default=0.017)
    ap.add_argument("--lambda2", type=float, default=0.016)
    ap.add_argument("--sigma1-range", default="0.01:0.06")
    ap.add_argument("--sigma2-range", default="0.5:1.2")
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--out", default="results/feasibility.csv")
    args = ap.parse_args()
    pathlib.Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    return cli_main(["scan-region", "--rho", str(args.rho),
                     "--lambda1", str(args.lambda1),
                     "--lambda2", str(args.lambda2),
                     "--sigma1-range", args.sigma1_range,
                     "--sigma2-range", args.sigma2_range,
                     "--steps", str(args.steps), "--out", args.out, "--svg"])


if __name__ == "__main__":
    sys.exit(run())
