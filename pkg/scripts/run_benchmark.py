#!/usr/bin/env python3
"""Run the bundled benchmark datasets end to end and print a compact
win/tie/loss summary.

Desk-scale defaults (10 runs); pass --runs 100 --budget 50 for the full
protocol if you have the patience.
"""

import argparse
import time
from pathlib import Path

from discrepal.harness import (ExperimentConfig, compare, ordered_pairs,
                               run_experiment, write_curves_csv,
                               write_summary_csv, write_wtl_csv)

REPO = Path(__file__).resolve().parent.parent

BENCHMARKS = {
    # dataset -> (sigma, lambda) from the hyperparameter table
    "ringnorm": (1.778, 10.0**-3.0),
    "banana": (0.645, 10.0**-2.2),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--datasets", nargs="*", default=list(BENCHMARKS))
    parser.add_argument("--setting", choices=["realizable", "agnostic"],
                        default="realizable")
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--budget", type=int, default=50)
    parser.add_argument("--seed", type=int, default=101)
    parser.add_argument("--out", default=str(REPO / "results"))
    args = parser.parse_args()

    out_root = Path(args.out)
    for name in args.datasets:
        sigma, lam = BENCHMARKS[name]
        cfg = ExperimentConfig(dataset=str(REPO / "data" / f"{name}.csv"),
                               setting=args.setting, sigma=sigma, reg_lambda=lam,
                               runs=args.runs, budget=args.budget, seed=args.seed)
        started = time.perf_counter()
        curves = run_experiment(cfg)
        elapsed = time.perf_counter() - started
        out = out_root / f"{name}_{args.setting}"
        out.mkdir(parents=True, exist_ok=True)
        write_curves_csv(out / "curves.csv", curves)
        write_summary_csv(out / "summary.csv", curves)
        write_wtl_csv(out / "wtl.csv", curves, stride=cfg.stride,
                      p_threshold=cfg.p_threshold, method=cfg.ttest)

        print(f"{name} ({args.setting}, {args.runs} runs, {elapsed:.0f}s)")
        for crit in cfg.criteria:
            final = curves.mean(crit)[-1]
            print(f"  {crit:20s} final MSE {final:.5f}")
        for a, b in ordered_pairs(cfg.criteria):
            wtl = compare(curves.curves[a], curves.curves[b], stride=cfg.stride,
                          p_threshold=cfg.p_threshold, method=cfg.ttest,
                          pair=f"{a} vs {b}")
            print(f"  {wtl.pair:45s} {wtl.wins} / {wtl.ties} / {wtl.losses}")


if __name__ == "__main__":
    main()
