"""Temporal self-attention over frames, and the spectrally blended layer.

Frames are the tokens. A video feature ``[C, N, h, w]`` is viewed as
``S = h*w`` independent sequences of shape ``[N, C]`` (spatial positions in
row-major order, channels last); :func:`to_sequence` and :func:`from_sequence`
are exact inverses.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError, ParameterError
from .spectral import check_video, spectral_blend


@dataclass(frozen=True)
class AttentionWeights:
    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray
    heads: int = 1

    def __post_init__(self):
        d = self.w_q.shape[0]
        for name in ("w_q", "w_k", "w_v"):
            m = getattr(self, name)
            if m.shape != (d, d):
                raise DimensionError(f"{name} must be {d}x{d}, got {list(m.shape)}")
            if not np.all(np.isfinite(m)):
                raise ParameterError(f"{name} has non-finite entries")
        if self.heads < 1 or d % self.heads:
            raise ParameterError(f"heads={self.heads} must divide d={d}")

    @property
    def dim(self) -> int:
        return self.w_q.shape[0]

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator, heads: int = 1) -> "AttentionWeights":
        """Gaussian weights with variance 1/dim."""
        w = rng.standard_normal((3, dim, dim)) / np.sqrt(dim)
        return cls(w[0], w[1], w[2], heads)

    @classmethod
    def identity(cls, dim: int, heads: int = 1) -> "AttentionWeights":
        eye = np.eye(dim)
        return cls(eye, eye.copy(), eye.copy(), heads)


def to_sequence(z) -> np.ndarray:
    """[C, N, h, w] -> [h*w, N, C]."""
    z = np.asarray(z)
    C, N, h, w = z.shape
    return np.ascontiguousarray(z.reshape(C, N, h * w).transpose(2, 1, 0))


def from_sequence(x, height: int, width: int) -> np.ndarray:
    """[h*w, N, C] -> [C, N, h, w]."""
    x = np.asarray(x)
    S, N, C = x.shape
    if S != height * width:
        raise DimensionError(f"{S} sequences cannot fill a {height}x{width} grid")
    return np.ascontiguousarray(x.transpose(2, 1, 0).reshape(C, N, height, width))


def project_qkv(z, w: AttentionWeights):
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 3 or z.shape[-1] != w.dim:
        raise DimensionError(f"sequence feature {list(z.shape)} does not match weight dim {w.dim}")
    return z @ w.w_q, z @ w.w_k, z @ w.w_v


def _split_heads(x, heads):
    S, N, d = x.shape
    dh = d // heads
    return np.ascontiguousarray(x.reshape(S, N, heads, dh).transpose(0, 2, 1, 3).reshape(S * heads, N, dh))


def _merge_heads(x, S, heads):
    _, N, dh = x.shape
    return np.ascontiguousarray(x.reshape(S, heads, N, dh).transpose(0, 2, 1, 3).reshape(S, N, heads * dh))


def _check_qkv(q, k, v, heads):
    q, k, v = (np.asarray(a, dtype=np.float64) for a in (q, k, v))
    if q.ndim != 3 or q.shape != k.shape or q.shape[:2] != v.shape[:2]:
        raise DimensionError(f"Q {list(q.shape)}, K {list(k.shape)}, V {list(v.shape)} are incompatible")
    if heads < 1 or q.shape[-1] % heads or v.shape[-1] % heads:
        raise ParameterError(f"heads={heads} must divide the feature dims")
    return q, k, v


def _softmax(logits):
    logits = logits - logits.max(axis=-1, keepdims=True)
    p = np.exp(logits)
    return p / p.sum(axis=-1, keepdims=True)


def global_attention(q, k, v, heads: int = 1, return_maps: bool = False):
    """Full softmax attention across frames.

    Returns ``(out [S, N, d], maps [S, H, N, N] or None)``.
    """
    q, k, v = _check_qkv(q, k, v, heads)
    S, N, d = q.shape
    qh, kh, vh = (_split_heads(a, heads) for a in (q, k, v))
    a = _softmax(qh @ kh.transpose(0, 2, 1) / np.sqrt(d // heads))
    out = _merge_heads(a @ vh, S, heads)
    return out, (a.reshape(S, heads, N, N) if return_maps else None)


def local_attention(q, k, v, alpha: int, heads: int = 1, return_maps: bool = False,
                    renormalize: bool = True, backend: str | None = None):
    """Attention where frame ``i`` only sees frames ``j`` with ``|i - j| <= alpha``.

    By default out-of-window logits are dropped before the softmax, so each row
    renormalizes over its window. ``renormalize=False`` instead zeroes a full
    softmax after the fact; those rows no longer sum to one.
    """
    if alpha < 0:
        raise ParameterError(f"alpha must be >= 0, got {alpha}")
    q, k, v = _check_qkv(q, k, v, heads)
    S, N, d = q.shape
    qh, kh, vh = (_split_heads(a, heads) for a in (q, k, v))
    scale = 1.0 / np.sqrt(d // heads)
    if renormalize:
        out, a = kernels.banded_attention(qh, kh, vh, alpha, scale, return_maps, backend)
    else:
        a = _softmax(qh @ kh.transpose(0, 2, 1) * scale)
        idx = np.arange(N)
        a = np.where(np.abs(idx[:, None] - idx[None, :]) <= alpha, a, 0.0)
        out = a @ vh
    out = _merge_heads(out, S, heads)
    return out, (a.reshape(S, heads, N, N) if return_maps else None)


def window_starts(frames: int, window: int, stride: int) -> list[int]:
    """Offsets 0, stride, 2*stride, ...; a final window is clamped to end at ``frames``."""
    if window < 1 or window > frames:
        raise ParameterError(f"window must be in [1, {frames}], got {window}")
    if stride < 1:
        raise ParameterError(f"stride must be >= 1, got {stride}")
    starts = list(range(0, frames - window + 1, stride))
    if starts[-1] + window < frames:
        starts.append(frames - window)
    return starts


def sliding_window_attention(q, k, v, window: int, stride: int, heads: int = 1):
    """Full attention inside each window; overlapping frames take the mean of their window outputs."""
    q, k, v = _check_qkv(q, k, v, heads)
    S, N, _ = q.shape
    acc = np.zeros((S, N, v.shape[-1]))
    count = np.zeros(N)
    for s in window_starts(N, window, stride):
        sl = slice(s, s + window)
        out, _ = global_attention(q[:, sl], k[:, sl], v[:, sl], heads)
        acc[:, sl] += out
        count[sl] += 1
    return acc / count[None, :, None]


def sliding_window_layer(z, w: AttentionWeights, window: int, stride: int):
    """Sliding-window baseline as a layer: each window is projected and attended separately."""
    z = np.asarray(z, dtype=np.float64)
    S, N, _ = z.shape
    acc = np.zeros_like(z)
    count = np.zeros(N)
    for s in window_starts(N, window, stride):
        sl = slice(s, s + window)
        q, k, v = project_qkv(z[:, sl], w)
        out, _ = global_attention(q, k, v, w.heads)
        acc[:, sl] += out
        count[sl] += 1
    return acc / count[None, :, None]


def spectralblend_ta(z_in, w: AttentionWeights, alpha: int, lpf, step: int, tau: int,
                     backend: str | None = None):
    """One temporal attention layer with spectral blending of the local and global paths.

    For ``step <= tau`` the result takes low frequencies from global attention
    and high frequencies from windowed attention; afterwards it is the
    windowed output alone.
    """
    z_in = check_video(z_in, "input feature")
    C, N, h, wd = z_in.shape
    if C != w.dim:
        raise DimensionError(f"input has {C} channels, weights expect {w.dim}")
    if step <= tau and np.shape(lpf) != (N, h, wd):
        raise DimensionError(f"filter dims {list(np.shape(lpf))} do not match (N, h, w) = {[N, h, wd]}")
    q, k, v = project_qkv(to_sequence(z_in), w)
    z_local, _ = local_attention(q, k, v, alpha, w.heads, backend=backend)
    z_local = from_sequence(z_local, h, wd)
    if step > tau:
        return z_local
    z_global, _ = global_attention(q, k, v, w.heads)
    return spectral_blend(from_sequence(z_global, h, wd), z_local, lpf)


def attention_diagonality(maps, k: int) -> dict:
    """Band mass within ``|i - j| <= k`` and mean row entropy (nats).

    ``maps`` may carry leading batch axes; statistics are averaged over them.
    Band mass is the in-band sum over the total sum, which equals the in-band
    sum over N for row-stochastic maps.
    """
    if k < 0:
        raise ParameterError(f"k must be >= 0, got {k}")
    a = np.asarray(maps, dtype=np.float64)
    N = a.shape[-1]
    a = a.reshape(-1, N, N)
    idx = np.arange(N)
    band = np.abs(idx[:, None] - idx[None, :]) <= k
    total = a.sum(axis=(1, 2))
    mass = np.where(band, a, 0.0).sum(axis=(1, 2)) / total
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(a > 0, a * np.log(a), 0.0)
    entropy = -plogp.sum(axis=-1).mean(axis=-1)
    return {
        "band_mass": float(mass.mean()),
        "row_entropy_mean": float(entropy.mean()),
        "N": int(N),
        "k": int(k),
    }
