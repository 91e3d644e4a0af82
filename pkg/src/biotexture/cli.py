"""Command line front end.

    biotexture extract --input DIR --output features.csv [--jobs N] ...
    biotexture eval --features features.csv --protocol holdout:0.7 --k 1 --seed 7
    biotexture invariance --image img.png --transforms rot90,flip_h,rescale:0.5

Exit codes: 0 success, 1 invariance violation, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .descriptor import ExtractOptions, channel_images, extract, feature_names
from .ecosystem import InvalidInputError, build_histogram
from .harness import (
    FeatureTable,
    invariance_check,
    parse_transforms,
    read_csv,
    run_holdout,
    run_kfold,
    write_csv,
)
from .taxonomy import build_tree, distance_matrix, matrix_to_csv

log = logging.getLogger("biotexture")

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}


class UsageError(Exception):
    pass


def load_rgb(path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def find_images(root: Path) -> list[tuple[str, str, Path]]:
    """(sample_id, label, path) for every image in a class-per-subdirectory tree."""
    found = []
    for class_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for path in sorted(class_dir.rglob("*")):
            if path.is_file() and path.suffix.lower() in IMAGE_SUFFIXES:
                found.append((path.relative_to(root).as_posix(), class_dir.name, path))
    return found


def _extract_one(job):
    path, opts = job
    try:
        return extract(load_rgb(path), opts).values, None
    except Exception as exc:  # undecodable or undersized files are skipped
        return None, f"{path}: {exc}"


def _dump_tree(out_dir: Path, sample_id: str, image, opts: ExtractOptions) -> None:
    stem = sample_id.replace("/", "__")
    for channel, gray in channel_images(image, opts).items():
        tree = build_tree(build_histogram(gray))
        (out_dir / f"{stem}.{channel}.tree.txt").write_text(tree.to_text(), encoding="utf-8")
        (out_dir / f"{stem}.{channel}.dist.csv").write_text(
            matrix_to_csv(tree, distance_matrix(tree)), encoding="utf-8"
        )


def _options(args) -> ExtractOptions:
    if args.unsharp_radius <= 0 or args.unsharp_amount <= 0:
        raise UsageError("--unsharp-radius and --unsharp-amount must be positive")
    if args.crimmins_iters < 1:
        raise UsageError("--crimmins-iters must be at least 1")
    return ExtractOptions(
        preprocess_enabled=not args.no_preprocess,
        unsharp_radius=args.unsharp_radius,
        unsharp_amount=args.unsharp_amount,
        crimmins_iterations=args.crimmins_iters,
        crimmins_schedule=args.crimmins_schedule,
        gray_only=getattr(args, "gray_only", False),
    )


def cmd_extract(args) -> int:
    root = Path(args.input)
    if not root.is_dir():
        raise UsageError(f"input directory not found: {root}")
    opts = _options(args)
    entries = find_images(root)
    jobs = [(path, opts) for _, _, path in entries]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_extract_one, jobs, chunksize=4))
    else:
        results = [_extract_one(j) for j in jobs]
    ids, labels, rows, skipped = [], [], [], 0
    for (sid, label, _), (values, err) in zip(entries, results):
        if err is not None:
            log.warning("skipping %s", err)
            skipped += 1
            continue
        ids.append(sid)
        labels.append(label)
        rows.append(values)
    names = feature_names(opts.gray_only)
    table = FeatureTable(ids, labels, np.array(rows).reshape(len(rows), len(names)), names)
    write_csv(table, args.output)
    if args.dump_tree:
        out_dir = Path(args.dump_tree)
        out_dir.mkdir(parents=True, exist_ok=True)
        kept = set(ids)
        for sid, _, path in entries:
            if sid in kept:
                _dump_tree(out_dir, sid, load_rgb(path), opts)
    print(f"wrote {len(ids)} rows to {args.output}; skipped {skipped} file(s)")
    return 0


def _parse_protocol(text: str):
    kind, _, arg = text.partition(":")
    try:
        if kind == "holdout":
            value = float(arg)
            if not 0 < value < 1:
                raise ValueError
            return kind, value
        if kind == "kfold":
            value = int(arg)
            if value < 2:
                raise ValueError
            return kind, value
    except ValueError:
        pass
    raise UsageError(f"invalid --protocol {text!r}; use holdout:<fraction> or kfold:<k>")


def cmd_eval(args) -> int:
    kind, value = _parse_protocol(args.protocol)
    if args.k < 1:
        raise UsageError("--k must be positive")
    table = read_csv(args.features)
    if kind == "holdout":
        result = run_holdout(table, value, args.k, args.seed)
    else:
        result = run_kfold(table, value, args.k, args.seed)
    print(f"protocol {args.protocol}, k={args.k}, seed={args.seed}, rows={len(table)}")
    print(result.report.to_text())
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(result.report.to_json(), fh, indent=2)
    return 0


def cmd_invariance(args) -> int:
    transforms = parse_transforms(args.transforms)
    if not transforms:
        raise UsageError("--transforms is empty")
    opts = _options(args)
    try:
        image = load_rgb(args.image)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read image {args.image}: {exc}") from None
    report = invariance_check(image, transforms, opts, args.scale_tolerance)
    print(report.to_text())
    return 1 if report.exact_violations else 0


def _add_extract_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-preprocess", action="store_true", help="skip unsharp and Crimmins filtering")
    p.add_argument("--unsharp-radius", type=float, default=1.0)
    p.add_argument("--unsharp-amount", type=float, default=1.0)
    p.add_argument("--crimmins-iters", type=int, default=1)
    p.add_argument("--crimmins-schedule", choices=("symmetric", "classic"), default="symmetric")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biotexture", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract BiT features for a class-per-directory dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--gray-only", action="store_true", help="14 features from the composite gray image")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--dump-tree", metavar="DIR", help="write each image's trees and distance matrices")
    _add_extract_options(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("eval", help="normalize, train and score kNN on a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--protocol", default="holdout:0.7")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("invariance", help="compare features before and after image transforms")
    p.add_argument("--image", required=True)
    p.add_argument(
        "--transforms",
        default="rot90,rot180,rot270,flip_h,flip_v,rescale:0.5,gamma:0.5,shuffle:13",
    )
    p.add_argument("--scale-tolerance", type=float, default=0.05)
    _add_extract_options(p)
    p.set_defaults(func=cmd_invariance)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        parser.print_usage(sys.stderr)
        print("biotexture: error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (UsageError, InvalidInputError, OSError) as exc:
        print(f"biotexture: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
