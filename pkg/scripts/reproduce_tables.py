#!/usr/bin/env python3
"""Desk-scale reproduction of the simulation tables.

Runs the six variance estimators over the three design grids (shape ladder,
effective-size ladder, threshold ladder) and the coverage grids, printing
aligned tables.  Defaults: 2000 study replications, 1e5 truth replications,
bootstrap M=199; the published studies used 1e4 / 1e6 / 999, so expect
agreement to roughly +-0.02 in Ave and +-1.5pp in coverage.

Usage:
    python scripts/reproduce_tables.py [--reps 2000] [--truth-reps 100000]
                                       [--boot-m 199] [--seed 8] [--fast]
"""

import argparse
import sys
import time

from gtail.simulate import SimConfig, run_coverage_study, run_variance_study, \
    true_variance
from gtail.theory import GammaParams
from gtail.variance import (JACKKNIFE, LARGE_SAMPLE, NOETHER, NOETHER_MOD,
                            UNBIASED, bootstrap_method)


def cell(stat, attr):
    if stat.negative_fraction > 0.01:
        return "-"
    return f"{getattr(stat, attr):.3f}"


def variance_table(title, points, methods, reps, truth_reps, seed):
    names = [str(m) for m in methods]
    print(f"\n{title}")
    print(" " * 14 + "  ".join(f"{n:>14}" for n in names))
    for label, params, d, n_eff in points:
        t0 = time.time()
        cfg = SimConfig(params=params, d=d, n_eff=n_eff, reps=reps,
                        methods=methods, seed=seed, truth_reps=truth_reps)
        res = run_variance_study(cfg)
        ave = "  ".join(f"{cell(s, 'ave_relative'):>14}" for s in res.stats)
        rmse = "  ".join(f"{cell(s, 'rmse'):>14}" for s in res.stats)
        print(f"{label:>8} Ave  {ave}")
        print(f"{'':>8} RMSE {rmse}   [{time.time() - t0:.0f}s, n={res.n_used}]")


def coverage_table(title, points, methods, reps, seed):
    names = [str(m) for m in methods]
    print(f"\n{title}")
    print(" " * 9 + "  ".join(f"{n:>14}" for n in names))
    for label, params, d, n_eff in points:
        cfg = SimConfig(params=params, d=d, n_eff=n_eff, reps=reps,
                        methods=methods, seed=seed)
        res = run_coverage_study(cfg)
        row = "  ".join(f"{100 * s.coverage:>14.1f}" for s in res.stats)
        print(f"{label:>8} {row}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--truth-reps", type=int, default=100_000)
    ap.add_argument("--boot-m", type=int, default=199)
    ap.add_argument("--seed", type=int, default=8)
    ap.add_argument("--fast", action="store_true",
                    help="smoke-test scale (400 reps, 2e4 truth)")
    args = ap.parse_args(argv)
    reps = 400 if args.fast else args.reps
    truth = 20_000 if args.fast else args.truth_reps

    all_methods = (UNBIASED, NOETHER, NOETHER_MOD, LARGE_SAMPLE,
                   bootstrap_method(args.boot_m), JACKKNIFE)
    ci_methods = (UNBIASED, LARGE_SAMPLE, bootstrap_method(args.boot_m),
                  JACKKNIFE)
    g = GammaParams

    variance_table(
        "Ave/RMSE of the variance estimators, n_eff=20, d=3, shape varies",
        [(f"a={a}", g(a, a), 3.0, 20) for a in (0.2, 0.5, 1.0, 2.0, 5.0)],
        all_methods, reps, truth, args.seed)
    variance_table(
        "Ave/RMSE, alpha=1, d=3, effective size varies",
        [(f"ne={ne}", g(1, 1), 3.0, ne) for ne in (10, 20, 40, 80, 160)],
        all_methods, reps, truth, args.seed)
    variance_table(
        "Ave/RMSE, alpha=1, n_eff=40, threshold varies",
        [(f"d={d}", g(1, 1), float(d), 40) for d in (0, 1, 2, 3, 4, 5)],
        all_methods, reps, truth, args.seed)
    coverage_table(
        "Coverage (pct) of 95pct intervals, n_eff=20, d=3, shape varies",
        [(f"a={a}", g(a, a), 3.0, 20) for a in (0.2, 0.5, 1.0, 2.0, 5.0)],
        ci_methods, reps, args.seed)
    coverage_table(
        "Coverage (pct), alpha=1, d=3, effective size varies",
        [(f"ne={ne}", g(1, 1), 3.0, ne) for ne in (10, 20, 40, 80, 160)],
        ci_methods, reps, args.seed)
    coverage_table(
        "Coverage (pct), alpha=1, n_eff=40, threshold varies",
        [(f"d={d}", g(1, 1), float(d), 40) for d in (0, 1, 2, 3, 4, 5)],
        ci_methods, reps, args.seed)
    return 0


if __name__ == "__main__":
    sys.exit(main())
