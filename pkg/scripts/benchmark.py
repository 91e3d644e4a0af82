"""Extraction throughput for square RGB images of a few sizes.

    python3 scripts/benchmark.py --sizes 64 128 256 --repeats 20
"""

import argparse
import statistics
import time

from biotexture.descriptor import ExtractOptions, extract
from biotexture.synthetic import texture_dataset


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    p.add_argument("--repeats", type=int, default=15)
    args = p.parse_args()

    print(f"{'size':>6} {'preprocess':>11} {'median ms':>10} {'min ms':>8}")
    for size in args.sizes:
        img = texture_dataset(per_class=1, size=size, seed=size)[0][0]
        for pre in (True, False):
            opts = ExtractOptions(preprocess_enabled=pre)
            extract(img, opts)
            times = []
            for _ in range(args.repeats):
                t0 = time.perf_counter()
                extract(img, opts)
                times.append(1000 * (time.perf_counter() - t0))
            print(f"{size:>6} {str(pre):>11} {statistics.median(times):>10.1f} {min(times):>8.1f}")


if __name__ == "__main__":
    main()
