"""kNN accuracy on the synthetic texture set over a sweep of k and seeds.

    python3 scripts/synthetic_classification.py --seeds 1 2 3 --per-class 40
"""

import argparse
import time

import numpy as np

from biotexture.descriptor import ExtractOptions
from biotexture.harness import build_table, run_holdout, run_kfold
from biotexture.synthetic import texture_dataset


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    p.add_argument("--per-class", type=int, default=40)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--ks", type=int, nargs="+", default=list(range(1, 22, 2)))
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--no-preprocess", action="store_true")
    args = p.parse_args()

    opts = ExtractOptions(preprocess_enabled=not args.no_preprocess)
    holdout = {k: [] for k in args.ks}
    kfold = {k: [] for k in args.ks}
    for seed in args.seeds:
        t0 = time.perf_counter()
        table = build_table(*texture_dataset(args.per_class, args.size, seed), opts)
        print(f"seed {seed}: {len(table)} images extracted in {time.perf_counter() - t0:.1f} s")
        for k in args.ks:
            holdout[k].append(run_holdout(table, 0.7, k, seed).report.accuracy)
            kfold[k].append(run_kfold(table, args.folds, k, seed).report.accuracy)

    print(f"\n{'k':>3}  {'holdout 0.7':>18}  {f'{args.folds}-fold':>18}")
    for k in args.ks:
        h, f = np.array(holdout[k]), np.array(kfold[k])
        print(f"{k:>3}  {h.mean():>10.4f} +/- {h.std():.4f}  {f.mean():>10.4f} +/- {f.std():.4f}")


if __name__ == "__main__":
    main()
