#!/usr/bin/env python3
"""Monte Carlo cross-check of the closed-form value at a few states.

Simulates the reflected extraction rule plus two naive baselines and
compares the estimates against the analytic value U.
"""
import argparse
import json
import pathlib
import sys

from regime_extract import Policy, SimConfig, U, estimate_value, \
    params_from_config, solve_control

HERE = pathlib.Path(__file__).resolve().parent


def run() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(HERE.parent/"configs"/"example.json"))
    ap.add_argument("--paths", type=int, default=20_000)
    ap.add_argument("--dt", type=float, default=2e-3)
    ap.add_argument("--horizon", type=float, default=None)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()
    params = params_from_config(json.load(open(args.config)))
    cs = solve_control(params)
    cfg = SimConfig(dt=args.dt, horizon=args.horizon, n_paths=args.paths,
                    base_seed=args.seed)
    states = [(-1.5, 0.5, 1), (0.6, 0.5, 2), (1.5, 0.5, 2)]
    print(f"{'state':>18} {'U':>10} {'policy':>22} {'mean':>10} {'se':>8}")
    for x, y, i in states:
        uval = U(cs, x, y, i)
        for pol in (Policy.reflect_optimal(), Policy.never_extract(),
                    Policy.extract_all_at_start()):
            out = estimate_value(cs, x, y, i, pol, cfg)
            print(f"{str((x, y, i)):>18} {uval:10.5f} {pol.policy_id:>22} "
                  f"{out.mean:10.5f} {out.std_error:8.5f}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
