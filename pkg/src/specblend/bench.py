"""Wall-time comparison of the three temporal layers on identical inputs.

Every "pass" is a full layer forward: QKV projection plus attention. The
sliding baseline pays one pass per window; the blended layer shares one
projection between its local and global attention evaluations.
"""
from __future__ import annotations

import math
import os
import platform
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .attention import (
    AttentionWeights,
    from_sequence,
    global_attention,
    project_qkv,
    sliding_window_layer,
    spectralblend_ta,
    to_sequence,
    window_starts,
)
from .errors import ParameterError
from .spectral import gaussian_lpf
from .tensorio import RngSpec

SIZE_GUARD = 2**24
MODES = ("direct", "sliding_window", "freelong")


@dataclass
class BenchReport:
    frames: int
    dim: int
    spatial: int
    window: int
    stride: int
    repetitions: int
    seconds: dict
    passes: dict
    attention_evaluations: dict
    flops: dict
    backend: str
    machine: str

    def to_dict(self) -> dict:
        return asdict(self)


def machine_descriptor() -> str:
    return (
        f"{platform.machine()} {platform.processor() or 'unknown-cpu'}; {os.cpu_count()} cpus; "
        f"{platform.system()} {platform.release()}; python {platform.python_version()}; numpy {np.__version__}"
    )


def grid_for(spatial: int) -> tuple[int, int]:
    """Closest-to-square (h, w) with h * w == spatial."""
    h = max(d for d in range(1, math.isqrt(spatial) + 1) if spatial % d == 0)
    return h, spatial // h


def min_time(fn, repetitions: int) -> float:
    best = math.inf
    for _ in range(repetitions):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def attention_flops(S: int, n: int, d: int, band: int | None = None) -> int:
    """Multiply-adds x2 for projection and attention over ``n`` frames; ``band`` keys per query if windowed."""
    keys = n if band is None else band
    return 2 * S * (3 * n * d * d + 2 * n * keys * d)


def bench_attention(frames=128, dim=64, spatial=256, window=16, stride=8, repetitions=5,
                    alpha=8, d0=0.25, seed=0, backend=None) -> BenchReport:
    for name, val in (("frames", frames), ("dim", dim), ("spatial", spatial), ("repetitions", repetitions)):
        if val < 1:
            raise ParameterError(f"{name} must be >= 1, got {val}")
    if frames * spatial * dim > SIZE_GUARD:
        raise ParameterError(f"N*S*d = {frames * spatial * dim} exceeds the size guard {SIZE_GUARD}")
    starts = window_starts(frames, window, stride)
    rng = RngSpec(seed)
    h, w = grid_for(spatial)
    z = rng.generator(1).standard_normal((dim, frames, h, w))
    weights = AttentionWeights.random(dim, rng.generator(2))
    lpf = gaussian_lpf(frames, h, w, d0)

    def direct():
        q, k, v = project_qkv(to_sequence(z), weights)
        return from_sequence(global_attention(q, k, v)[0], h, w)

    def sliding():
        return from_sequence(sliding_window_layer(to_sequence(z), weights, window, stride), h, w)

    def freelong():
        return spectralblend_ta(z, weights, alpha, lpf, step=1, tau=1, backend=backend)

    seconds = {}
    for mode, fn in zip(MODES, (direct, sliding, freelong)):
        fn()  # warm-up
        seconds[mode] = min_time(fn, repetitions)

    band = min(2 * alpha + 1, frames)
    local = attention_flops(spatial, frames, dim, band) - 6 * spatial * frames * dim * dim
    return BenchReport(
        frames=frames, dim=dim, spatial=spatial, window=window, stride=stride,
        repetitions=repetitions,
        seconds=seconds,
        passes={"direct": 1, "sliding_window": len(starts), "freelong": 1},
        attention_evaluations={"direct": 1, "sliding_window": len(starts), "freelong": 2},
        flops={
            "direct": attention_flops(spatial, frames, dim),
            "sliding_window": len(starts) * attention_flops(spatial, window, dim),
            "freelong": attention_flops(spatial, frames, dim) + local,
        },
        backend=backend or kernels.DEFAULT_BACKEND,
        machine=machine_descriptor(),
    )
