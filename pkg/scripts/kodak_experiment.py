#!/usr/bin/env python3
"""Corpus experiment: inpaint every grayscale Kodak image under seeded erasures.

Point --kodak at a directory of PGM images (the public Kodak set converted
to 8-bit grayscale), e.g.:

    python scripts/kodak_experiment.py --kodak ~/data/kodak_gray --out results.csv

For each image the script generates a reproducible scatter-style erasure
mask (small text-like rectangles, roughly the given coverage), restores the
image with 16x16 patches at stride 2, and reports per-image RMSE/SSIM plus
the 25/50/75 percentiles over the corpus.
"""

import argparse
import csv
import os
import sys
import time

import numpy as np

from paco.inpaint import InpaintConfig, inpaint
from paco.metrics import rmse, ssim
from paco.ndsignal import Mask, Signal, load_image


def scattered_rect_mask(shape, coverage=0.04, seed=0, min_side=3, max_side=9) -> Mask:
    """Scatter small rectangles until roughly `coverage` of samples are missing."""
    rng = np.random.default_rng(seed)
    missing = np.zeros(shape, dtype=bool)
    target = coverage * missing.size
    while missing.sum() < target:
        h = int(rng.integers(min_side, max_side + 1))
        w = int(rng.integers(min_side, max_side + 1))
        r = int(rng.integers(0, shape[0] - h + 1))
        c = int(rng.integers(0, shape[1] - w + 1))
        missing[r : r + h, c : c + w] = True
    return Mask(~missing)


def run_image(path, config, coverage, seed):
    (truth,) = load_image(path)
    mask = scattered_rect_mask(truth.shape, coverage=coverage, seed=seed)
    damaged = truth.samples.copy()
    damaged[mask.missing] = 0.0
    restored, trace = inpaint(Signal(damaged, peak=255.0), mask, config)
    return {
        "image": os.path.basename(path),
        "missing_fraction": mask.n_missing / truth.size,
        "iterations": len(trace),
        "rmse": rmse(truth.samples, restored.samples),
        "ssim": ssim(truth.samples, restored.samples, 255.0),
    }


def run_corpus(kodak_dir, config=None, coverage=0.04, seed=0, limit=None):
    config = config or InpaintConfig(patch_shape=(16, 16), strides=(2, 2), max_iter=128)
    paths = sorted(
        os.path.join(kodak_dir, name)
        for name in os.listdir(kodak_dir)
        if name.lower().endswith(".pgm")
    )
    if limit:
        paths = paths[:limit]
    if not paths:
        raise SystemExit(f"no .pgm images under {kodak_dir}")
    results = []
    for i, path in enumerate(paths):
        t0 = time.time()
        row = run_image(path, config, coverage, seed + i)
        row["seconds"] = time.time() - t0
        results.append(row)
        print(
            f"{row['image']}: rmse={row['rmse']:.2f} ssim={row['ssim']:.4f} "
            f"({row['iterations']} iters, {row['seconds']:.1f}s)"
        )
    return results


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kodak", required=True, help="directory of grayscale PGM images")
    parser.add_argument("--out", default=None, help="write per-image results CSV here")
    parser.add_argument("--coverage", type=float, default=0.04,
                        help="approximate missing-sample fraction")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-iter", type=int, default=128)
    parser.add_argument("--limit", type=int, default=None, help="only the first N images")
    args = parser.parse_args(argv)

    config = InpaintConfig(patch_shape=(16, 16), strides=(2, 2), max_iter=args.max_iter)
    results = run_corpus(args.kodak, config, args.coverage, args.seed, args.limit)

    ssims = sorted(r["ssim"] for r in results)
    rmses = sorted(r["rmse"] for r in results)
    for name, values in (("ssim", ssims), ("rmse", rmses)):
        q25, q50, q75 = np.percentile(values, [25, 50, 75])
        print(f"{name}: p25={q25:.4f} median={q50:.4f} p75={q75:.4f}")

    if args.out:
        with open(args.out, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(results[0].keys()))
            writer.writeheader()
            writer.writerows(results)
    return 0


if __name__ == "__main__":
    sys.exit(main())
