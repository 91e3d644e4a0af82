"""Per-index relative change of the BiT features under image transforms.

Prints one row per index (averaged over channels and images) and one
column per transform.  Uses synthetic textures and smooth gradients, or a
directory of images when --images is given.

    python3 scripts/invariance_table.py --no-preprocess
"""

import argparse
from pathlib import Path

import numpy as np

from biotexture.cli import load_rgb
from biotexture.descriptor import CHANNELS, INDEX_NAMES, ExtractOptions, extract
from biotexture.harness import apply_transform, parse_transforms
from biotexture.synthetic import smooth_gradient, texture_dataset


def sample_images(n, seed):
    textures, _, _ = texture_dataset(per_class=max(1, n // 4), size=96, seed=seed)
    return textures[:n] + [smooth_gradient(128, seed + i) for i in range(2)]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--images", help="directory of images (searched recursively)")
    p.add_argument("--count", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transforms", default="rot90,rot180,flip_h,flip_v,replicate:2,rescale:0.5,gamma:0.5,gamma:2,shuffle:13")
    p.add_argument("--no-preprocess", action="store_true")
    args = p.parse_args()

    if args.images:
        paths = sorted(q for q in Path(args.images).rglob("*") if q.suffix.lower() in {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"})
        images = [load_rgb(q) for q in paths[: args.count]]
    else:
        images = sample_images(args.count, args.seed)
    opts = ExtractOptions(preprocess_enabled=not args.no_preprocess)
    transforms = parse_transforms(args.transforms)

    # rel[t, image, feature]
    rel = np.zeros((len(transforms), len(images), len(CHANNELS) * len(INDEX_NAMES)))
    for j, img in enumerate(images):
        base = extract(img, opts).values
        for i, t in enumerate(transforms):
            other = extract(apply_transform(img, t), opts).values
            diff = np.abs(other - base)
            rel[i, j] = np.where(diff == 0, 0.0, diff / np.maximum(np.abs(base), 1e-12))
    per_index = rel.reshape(len(transforms), len(images), len(CHANNELS), len(INDEX_NAMES)).mean(axis=(1, 2))

    width = max(len(t.token) for t in transforms) + 2
    print(f"{len(images)} images, preprocessing {'on' if opts.preprocess_enabled else 'off'}; mean relative change")
    print(f"{'index':<12}" + "".join(f"{t.token:>{width}}" for t in transforms))
    for k, name in enumerate(INDEX_NAMES):
        print(f"{name:<12}" + "".join(f"{per_index[i, k]:>{width}.4f}" for i in range(len(transforms))))


if __name__ == "__main__":
    main()
