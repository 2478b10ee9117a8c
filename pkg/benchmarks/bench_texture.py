#!/usr/bin/env python3
"""Benchmark the compiled texture kernels against the numpy fallback.

Times each matrix family and a full 94-feature extraction on representative
grid sizes, printing a side-by-side table with speedups.

Usage: python benchmarks/bench_texture.py [--repeats N]
"""

import argparse
import time

import numpy as np

from frd import backends
from frd.config import FeatureConfig
from frd.features import extract_all
from frd.grid import ImageGrid
from frd.texture import (
    build_glcm,
    build_gldm,
    build_glrlm,
    build_glszm,
    build_ngtdm,
    directions,
    discretize,
)


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_case(label, image, config, repeats):
    grid = discretize(image, bin_count=config.bin_count)
    dirs = directions(image.dims)
    cases = {
        "glcm": lambda: [build_glcm(grid, d, config.glcm_distance) for d in dirs],
        "glrlm": lambda: [build_glrlm(grid, d) for d in dirs],
        "glszm": lambda: build_glszm(grid),
        "ngtdm": lambda: build_ngtdm(grid),
        "gldm": lambda: build_gldm(grid, config.gldm_alpha),
        "extract_all": lambda: extract_all(image, config=config),
    }
    names = backends.available()
    print(f"\n== {label} (backends: {', '.join(names)}) ==")
    header = f"{'kernel':<12}" + "".join(f"{n:>12}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for kernel, fn in cases.items():
        times = []
        for name in names:
            backends.set_backend(name)
            times.append(_time(fn, repeats))
        row = f"{kernel:<12}" + "".join(f"{t * 1000:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>9.1f}x"
        print(row)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    bench_case(
        "2D 224x224 (single-breast crop size)",
        ImageGrid(rng.normal(1000.0, 150.0, (224, 224))),
        FeatureConfig(dims=2),
        args.repeats,
    )
    bench_case(
        "3D 64x64x64",
        ImageGrid(rng.normal(1000.0, 150.0, (64, 64, 64))),
        FeatureConfig(dims=3),
        args.repeats,
    )


if __name__ == "__main__":
    main()
