"""Robustness to contrast change: train on original images, test on
gamma-corrected copies of the held-out images.

    python3 scripts/gamma_study.py --gammas 0.5 0.8 1.25 2
"""

import argparse

from biotexture.descriptor import ExtractOptions
from biotexture.harness import (
    TransformSpec,
    apply_minmax,
    apply_transform,
    build_table,
    evaluate,
    fit_minmax,
    holdout_split,
    knn_predict_table,
    knn_train,
)
from biotexture.synthetic import texture_dataset


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--gammas", type=float, nargs="+", default=[0.5, 0.8, 1.0, 1.25, 2.0])
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--per-class", type=int, default=40)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--no-preprocess", action="store_true")
    args = p.parse_args()

    opts = ExtractOptions(preprocess_enabled=not args.no_preprocess)
    images, labels, ids = texture_dataset(args.per_class, 64, args.seed)
    by_id = dict(zip(ids, images))
    table = build_table(images, labels, ids, opts)
    train, test = holdout_split(table, 0.7, args.seed)
    params = fit_minmax(train)
    model = knn_train(apply_minmax(train, params), args.k)

    print(f"train {len(train)} originals, test {len(test)} gamma-corrected, k={args.k}")
    for g in args.gammas:
        shifted = [apply_transform(by_id[sid], TransformSpec("gamma", g)) for sid in test.sample_ids]
        test_g = build_table(shifted, test.labels, test.sample_ids, opts)
        report = evaluate(knn_predict_table(model, apply_minmax(test_g, params)), test_g.labels)
        print(f"gamma {g:<5g} accuracy {report.accuracy:.4f}  kappa {report.kappa:.4f}")


if __name__ == "__main__":
    main()
