"""Compare the compiled and numpy banded-attention kernels.

    python benchmarks/bench_backends.py [--frames 128] [--dim 64] [--spatial 256] [--alpha 8] [--reps 5]

Also times the full blended layer under each backend. Reports min-of-reps
wall time; absolute numbers are machine dependent.
"""
import argparse
import json

import numpy as np

from specblend import kernels
from specblend.attention import AttentionWeights, spectralblend_ta
from specblend.bench import grid_for, machine_descriptor, min_time
from specblend.spectral import gaussian_lpf


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--frames", type=int, default=128)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--spatial", type=int, default=256)
    p.add_argument("--alpha", type=int, default=8)
    p.add_argument("--reps", type=int, default=5)
    args = p.parse_args()

    rng = np.random.default_rng(0)
    q, k, v = rng.standard_normal((3, args.spatial, args.frames, args.dim))
    scale = 1 / np.sqrt(args.dim)
    h, w = grid_for(args.spatial)
    z = rng.standard_normal((args.dim, args.frames, h, w))
    weights = AttentionWeights.random(args.dim, rng)
    lpf = gaussian_lpf(args.frames, h, w)

    results = {}
    reference = None
    for name in sorted(kernels.BACKENDS):
        out, _ = kernels.banded_attention(q, k, v, args.alpha, scale, backend=name)
        if reference is None:
            reference = out
        results[name] = {
            "kernel_s": min_time(lambda: kernels.banded_attention(q, k, v, args.alpha, scale, backend=name), args.reps),
            "layer_s": min_time(lambda: spectralblend_ta(z, weights, args.alpha, lpf, 1, 1, backend=name), args.reps),
            "max_abs_diff_vs_first": float(np.abs(out - reference).max()),
        }
    if "compiled" in results:
        results["kernel_speedup"] = results["python"]["kernel_s"] / results["compiled"]["kernel_s"]
    print(json.dumps({"args": vars(args), "threads": kernels.default_threads(),
                      "machine": machine_descriptor(), "results": results}, indent=2))


if __name__ == "__main__":
    main()
