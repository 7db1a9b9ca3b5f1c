"""Numpy reference implementation of the banded attention kernel.

Keys and values are zero-padded by ``alpha`` frames on both sides and viewed
as ``2*alpha + 1`` wide windows, so the cost is O(N * alpha) rather than O(N^2).
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def banded_attention(q, k, v, alpha, scale, want_maps=False, num_threads=0):
    B, N, D = q.shape
    alpha = min(int(alpha), N - 1)
    width = 2 * alpha + 1
    pad = ((0, 0), (alpha, alpha), (0, 0))
    kw = sliding_window_view(np.pad(k, pad), width, axis=1)  # [B, N, D, width]
    vw = sliding_window_view(np.pad(v, pad), width, axis=1)
    logits = np.einsum("bnd,bndw->bnw", q, kw) * scale
    j = np.arange(N)[:, None] + np.arange(-alpha, alpha + 1)[None, :]
    valid = (j >= 0) & (j < N)
    logits = np.where(valid, logits, -np.inf)
    logits -= logits.max(axis=-1, keepdims=True)
    p = np.exp(logits)
    p /= p.sum(axis=-1, keepdims=True)
    out = np.einsum("bnw,bndw->bnd", p, vw)
    if not want_maps:
        return out, None
    maps = np.zeros((B, N, N))
    rows, cols = np.nonzero(valid)
    maps[:, rows, j[rows, cols]] = p[:, rows, cols]
    return out, maps
