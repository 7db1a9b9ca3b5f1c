"""Spectral blending of windowed and full-sequence temporal attention.

Low temporal/spatial frequencies come from global attention, high ones from
windowed attention, mixed through a Gaussian low-pass filter in the 3-D
Fourier domain.
"""
from .attention import (
    AttentionWeights,
    attention_diagonality,
    from_sequence,
    global_attention,
    local_attention,
    project_qkv,
    sliding_window_attention,
    spectralblend_ta,
    to_sequence,
    window_starts,
)
from .kernels import BACKENDS, DEFAULT_BACKEND
from .spectral import (
    BandMask,
    BandReport,
    band_energy_fraction,
    band_mask,
    dft3_oracle,
    fft3,
    gaussian_lpf,
    ifft3,
    relative_band_ratio,
    spectral_blend,
)
from .tensorio import RngSpec, read_tensor, sample_gaussian, write_tensor

__version__ = "0.1.0"
