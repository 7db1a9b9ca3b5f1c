"""3-D FFT helpers, the Gaussian low-pass filter, band masks and band energies.

Spectra use the unshifted layout (DC at index 0 on every transformed axis).
Per-axis normalized frequency of bin ``k`` on an axis of length ``L`` is
``2k/L`` for ``k <= L/2`` and ``2(k-L)/L`` otherwise, so Nyquist sits at +1.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.fft as sfft

from .errors import (
    DimensionError,
    ImaginaryResidueError,
    OracleSizeError,
    ParameterError,
    UndefinedFractionError,
    UndefinedRatioError,
)

DOMAINS = ("spatial", "temporal", "spatiotemporal")
ORACLE_MAX_BINS = 4096
_AXES = (1, 2, 3)


def check_video(z, name="feature") -> np.ndarray:
    z = np.asarray(z)
    if z.ndim != 4 or min(z.shape) < 1:
        raise DimensionError(f"{name} must have dims [C, N, h, w], got {list(z.shape)}")
    if not np.all(np.isfinite(z)):
        raise ParameterError(f"{name} contains non-finite values")
    return z


def normalized_freqs(length: int) -> np.ndarray:
    k = np.arange(length, dtype=np.float64)
    return np.where(k <= length / 2, 2.0 * k / length, 2.0 * (k - length) / length)


def _workers() -> int:
    from .kernels import default_threads

    return default_threads()


def fft3(z) -> np.ndarray:
    """Unnormalized forward DFT over (N, h, w), separately per channel."""
    z = check_video(z).astype(np.complex128)
    return sfft.fftn(z, axes=_AXES, workers=_workers())


def ifft3(s, check: bool = True) -> np.ndarray:
    """Inverse of :func:`fft3` (carries the 1/(N*h*w) factor); returns the real part.

    With ``check`` the imaginary residue must stay below
    ``1e-3 * (max|real| + 1e-12)``, which holds for any conjugate-symmetric
    spectrum; otherwise :class:`ImaginaryResidueError` is raised.
    """
    s = np.asarray(s)
    if s.ndim != 4:
        raise DimensionError(f"spectrum must have dims [C, N, h, w], got {list(s.shape)}")
    out = sfft.ifftn(s.astype(np.complex128, copy=False), axes=_AXES, workers=_workers())
    if check:
        residue = float(np.max(np.abs(out.imag)))
        limit = 1e-3 * (float(np.max(np.abs(out.real))) + 1e-12)
        if residue > limit:
            raise ImaginaryResidueError(
                f"imaginary residue {residue:.3g} exceeds {limit:.3g}; spectrum is not conjugate-symmetric"
            )
    return out.real.copy()


def dft3_oracle(z) -> np.ndarray:
    """Direct summation DFT over (N, h, w). Test oracle only; O(M^2) in the bin count M."""
    z = check_video(z)
    C, N, h, w = z.shape
    m = N * h * w
    if m > ORACLE_MAX_BINS:
        raise OracleSizeError(f"dft3_oracle refuses {m} bins (limit {ORACLE_MAX_BINS})")
    grid = np.stack(np.meshgrid(np.arange(N), np.arange(h), np.arange(w), indexing="ij"), -1).reshape(m, 3)
    lengths = np.array([N, h, w], dtype=np.float64)
    flat = z.reshape(C, m).astype(np.complex128)
    out = np.empty((C, m), dtype=np.complex128)
    for start in range(0, m, 256):
        kk = grid[start:start + 256].astype(np.float64)
        # phase[k, n] = 2*pi * sum_a k_a n_a / L_a
        phase = 2.0 * np.pi * ((kk / lengths) @ grid.T.astype(np.float64))
        out[:, start:start + 256] = flat @ np.exp(-1j * phase).T
    return out.reshape(C, N, h, w)


def gaussian_lpf(frames: int, height: int, width: int, d0: float = 0.25) -> np.ndarray:
    """Gaussian low-pass weights ``exp(-d^2 / (2 d0^2))`` on an [N, h, w] grid.

    ``d^2`` is the plain sum of squared per-axis normalized frequencies, so the
    corner bin sits at ``d = sqrt(3)``.
    """
    if min(frames, height, width) < 1:
        raise DimensionError(f"filter dims must be >= 1, got {[frames, height, width]}")
    if not d0 > 0:
        raise ParameterError(f"d0 must be positive, got {d0}")
    ft, fh, fw = np.meshgrid(
        normalized_freqs(frames), normalized_freqs(height), normalized_freqs(width), indexing="ij"
    )
    d2 = ft**2 + fh**2 + fw**2
    return np.exp(-d2 / (2.0 * d0 * d0)).astype(np.float32)


@dataclass(frozen=True)
class BandMask:
    domain: str
    bins: np.ndarray
    split: float


def _radial(domain: str, dims) -> np.ndarray:
    freqs = [normalized_freqs(int(n)) for n in dims]
    grids = np.meshgrid(*freqs, indexing="ij")
    return np.sqrt(sum(g**2 for g in grids) / len(grids))


def _domain_dims(domain: str, dims) -> tuple[int, ...]:
    expected = {"temporal": 1, "spatial": 2, "spatiotemporal": 3}
    if domain not in expected:
        raise ParameterError(f"unknown domain {domain!r}; choose from {DOMAINS}")
    dims = tuple(int(d) for d in dims)
    if len(dims) != expected[domain] or min(dims) < 1:
        raise DimensionError(f"{domain} mask needs {expected[domain]} positive dims, got {list(dims)}")
    return dims


def band_mask(domain: str, dims, split: float = 0.25) -> tuple[BandMask, BandMask]:
    """Low/high partition of the bins by ``r = sqrt(mean_a f_a^2)``; low is ``r <= split``."""
    dims = _domain_dims(domain, dims)
    if not 0 < split < 1:
        raise ParameterError(f"split must lie in (0, 1), got {split}")
    low = _radial(domain, dims) <= split
    return BandMask(domain, low, split), BandMask(domain, ~low, split)


def mask_dims_for(z: np.ndarray, domain: str) -> tuple[int, ...]:
    _, N, h, w = z.shape
    return {"temporal": (N,), "spatial": (h, w), "spatiotemporal": (N, h, w)}[domain]


def _power(z: np.ndarray, domain: str) -> tuple[np.ndarray, tuple[int, ...]]:
    if domain == "temporal":
        p = np.abs(np.fft.fft(z, axis=1)) ** 2  # [C, N, h, w]
        return np.moveaxis(p, 1, -1), (-1,)
    if domain == "spatial":
        return np.abs(np.fft.fft2(z, axes=(2, 3))) ** 2, (-2, -1)
    return np.abs(np.fft.fftn(z, axes=_AXES)) ** 2, (-3, -2, -1)


def band_energy_fraction(z, mask: BandMask) -> float:
    """Share of spectral energy inside ``mask``, averaged over the untransformed axes.

    Temporal masks transform each (c, y, x) series, spatial masks each (c, n)
    frame, spatiotemporal masks each channel. Series with zero energy are
    skipped; if all are zero the fraction is undefined.
    """
    z = check_video(z).astype(np.float64, copy=False)
    want = mask_dims_for(z, mask.domain)
    if tuple(mask.bins.shape) != want:
        raise DimensionError(f"{mask.domain} mask has dims {list(mask.bins.shape)}, feature needs {list(want)}")
    power, axes = _power(z, mask.domain)
    total = power.sum(axis=axes)
    inside = np.where(mask.bins, power, 0.0).sum(axis=axes)
    live = total > 0
    if not np.any(live):
        raise UndefinedFractionError(f"{mask.domain} band fraction undefined: input has zero energy")
    return float(np.mean(inside[live] / total[live]))


def relative_band_ratio(long, short, domain: str, split: float = 0.25) -> dict[str, float]:
    """Per-band fraction of ``long`` divided by that of the reference ``short``."""
    long = check_video(long, "long video")
    short = check_video(short, "reference video")
    if long.shape[0] != short.shape[0]:
        raise DimensionError(f"channel counts differ: {long.shape[0]} vs {short.shape[0]}")
    out = {}
    for band, lm, sm in zip(
        ("low", "high"),
        band_mask(domain, mask_dims_for(long, domain), split),
        band_mask(domain, mask_dims_for(short, domain), split),
    ):
        ref = band_energy_fraction(short, sm)
        if ref == 0:
            raise UndefinedRatioError(f"{domain} {band}-band reference fraction is zero")
        out[band] = band_energy_fraction(long, lm) / ref
    return out


def spectral_blend_spectrum(z_global, z_local, lpf) -> np.ndarray:
    """``P * fft3(global) + (1 - P) * fft3(local)``, before the inverse transform."""
    z_global = check_video(z_global, "global feature")
    z_local = check_video(z_local, "local feature")
    if z_global.shape != z_local.shape:
        raise DimensionError(f"global {list(z_global.shape)} and local {list(z_local.shape)} shapes differ")
    lpf = np.asarray(lpf)
    if lpf.shape != z_global.shape[1:]:
        raise DimensionError(f"filter dims {list(lpf.shape)} do not match (N, h, w) = {list(z_global.shape[1:])}")
    p = lpf.astype(np.float64)[None]
    return fft3(z_global) * p + fft3(z_local) * (1.0 - p)


def spectral_blend(z_global, z_local, lpf) -> np.ndarray:
    """Low frequencies from ``z_global``, high frequencies from ``z_local``.

    Evaluated as ``local + ifft3(P * fft3(global - local))``, which has the same
    spectrum as the two-transform form but needs one forward FFT instead of two.
    """
    z_global = check_video(z_global, "global feature")
    z_local = check_video(z_local, "local feature")
    if z_global.shape != z_local.shape:
        raise DimensionError(f"global {list(z_global.shape)} and local {list(z_local.shape)} shapes differ")
    lpf = np.asarray(lpf)
    if lpf.shape != z_global.shape[1:]:
        raise DimensionError(f"filter dims {list(lpf.shape)} do not match (N, h, w) = {list(z_global.shape[1:])}")
    diff = fft3(z_global.astype(np.float64) - z_local)
    diff *= lpf.astype(np.float64)[None]
    return z_local + ifft3(diff)


@dataclass
class BandReport:
    domain: str
    split: float
    low_fraction: float
    high_fraction: float
    ratio_low: float | None = None
    ratio_high: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)
