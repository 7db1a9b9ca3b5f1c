import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specblend.errors import (
    DimensionError,
    ImaginaryResidueError,
    OracleSizeError,
    ParameterError,
    UndefinedFractionError,
    UndefinedRatioError,
)
from specblend.spectral import (
    BandReport,
    band_energy_fraction,
    band_mask,
    dft3_oracle,
    fft3,
    gaussian_lpf,
    ifft3,
    normalized_freqs,
    relative_band_ratio,
    spectral_blend,
    spectral_blend_spectrum,
)


def box_blur(z):
    """3x3 circular box blur over (h, w)."""
    return sum(np.roll(z, (dy, dx), axis=(2, 3)) for dy in (-1, 0, 1) for dx in (-1, 0, 1)) / 9.0


# --- transforms ---


def test_fft_of_constant():
    s = fft3(np.full((1, 2, 2, 2), 3.0))
    assert s[0, 0, 0, 0] == pytest.approx(24.0)
    s[0, 0, 0, 0] = 0
    assert np.abs(s).max() < 1e-12


def test_fft_of_impulse():
    z = np.zeros((2, 2, 3, 2))
    z[1, 0, 0, 0] = 1.0
    s = fft3(z)
    np.testing.assert_allclose(s[1], 1.0, atol=1e-12)
    np.testing.assert_allclose(s[0], 0.0, atol=1e-12)


def test_fft_matches_oracle(rng):
    for _ in range(20):
        z = rng.standard_normal((1, 4, 4, 4))
        assert np.abs(fft3(z) - dft3_oracle(z)).max() <= 1e-4


def test_oracle_on_constant():
    z = np.full((1, 2, 2, 2), 0.5)
    np.testing.assert_allclose(dft3_oracle(z), fft3(z), atol=1e-12)


def test_oracle_size_guard():
    dft3_oracle(np.zeros((1, 64, 8, 8)))
    with pytest.raises(OracleSizeError):
        dft3_oracle(np.zeros((1, 128, 8, 8)))


def test_round_trip(rng):
    z = rng.standard_normal((4, 16, 8, 8)).astype(np.float32)
    assert np.abs(ifft3(fft3(z)) - z).max() <= 1e-4


def test_inverse_of_dc_only():
    s = np.zeros((1, 2, 2, 2), dtype=complex)
    s[0, 0, 0, 0] = 8 * 1.5
    np.testing.assert_allclose(ifft3(s), 1.5, atol=1e-12)


def test_conjugate_symmetric_spectrum_gives_real_output(rng):
    s = fft3(rng.standard_normal((2, 6, 5, 4))) * gaussian_lpf(6, 5, 4, 0.3)[None]
    ifft3(s)  # passes the residue check


def test_asymmetric_spectrum_is_rejected():
    s = np.zeros((1, 4, 4, 4), dtype=complex)
    s[0, 1, 0, 0] = 1.0
    with pytest.raises(ImaginaryResidueError):
        ifft3(s)
    ifft3(s, check=False)


def test_parseval(rng):
    z = rng.standard_normal((4, 16, 8, 8))
    lhs = np.sum(z**2)
    rhs = np.sum(np.abs(fft3(z)) ** 2) / (16 * 8 * 8)
    assert abs(lhs - rhs) / lhs <= 1e-4


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**32 - 1))
def test_linearity(a, b, seed):
    r = np.random.default_rng(seed)
    x, y = r.standard_normal((2, 2, 5, 3, 4))
    assert np.abs(fft3(a * x + b * y) - (a * fft3(x) + b * fft3(y))).max() <= 1e-4


# --- filter ---


def test_normalized_freqs_even_and_odd():
    np.testing.assert_allclose(normalized_freqs(4), [0, 0.5, 1.0, -0.5])
    np.testing.assert_allclose(normalized_freqs(5), [0, 0.4, 0.8, -0.8, -0.4])


def test_filter_dc_and_stop_frequency():
    p = gaussian_lpf(16, 8, 8, 0.25)
    assert p.shape == (16, 8, 8) and p.dtype == np.float32
    assert p[0, 0, 0] == 1.0
    # temporal bin 2 of 16 sits at f = 0.25 = d0
    assert abs(p[2, 0, 0] - math.exp(-0.5)) <= 1e-6
    assert abs(p[14, 0, 0] - 0.606531) <= 1e-6


def test_filter_all_pass_limit():
    assert gaussian_lpf(16, 8, 8, 1e6).min() >= 1 - 1e-9


def test_filter_monotone_in_distance():
    p = gaussian_lpf(16, 8, 8, 0.25).ravel()
    ft, fh, fw = np.meshgrid(normalized_freqs(16), normalized_freqs(8), normalized_freqs(8), indexing="ij")
    d = np.sqrt(ft**2 + fh**2 + fw**2).ravel()
    order = np.argsort(d, kind="stable")
    assert np.all(np.diff(p[order]) <= 0)
    assert p.min() >= 0 and p.max() <= 1


@pytest.mark.parametrize("d0", [0, -1])
def test_filter_rejects_bad_d0(d0):
    with pytest.raises(ParameterError):
        gaussian_lpf(4, 4, 4, d0)


# --- masks ---


def test_temporal_mask_bins():
    low, high = band_mask("temporal", [16], 0.25)
    assert list(np.nonzero(low.bins)[0]) == [0, 1, 2, 14, 15]
    assert high.domain == "temporal"


def test_spatial_mask_2x2():
    low, _ = band_mask("spatial", [2, 2], 0.25)
    assert low.bins.tolist() == [[True, False], [False, False]]


@pytest.mark.parametrize("domain,dims", [("temporal", [7]), ("spatial", [5, 6]), ("spatiotemporal", [9, 4, 3])])
@pytest.mark.parametrize("split", [0.1, 0.25, 0.6])
def test_masks_partition(domain, dims, split):
    low, high = band_mask(domain, dims, split)
    assert np.all(low.bins ^ high.bins)


@pytest.mark.parametrize("split", [0, 1, -0.2, 1.5])
def test_mask_rejects_split(split):
    with pytest.raises(ParameterError):
        band_mask("temporal", [8], split)


def test_mask_rejects_wrong_rank():
    with pytest.raises(DimensionError):
        band_mask("spatial", [8], 0.25)


# --- blend ---


def test_blend_partition_of_unity(rng):
    z = rng.standard_normal((4, 16, 8, 8))
    out = spectral_blend(z, z, gaussian_lpf(16, 8, 8))
    assert np.abs(out - z).max() <= 1e-4


def test_blend_extreme_filters(rng):
    g, l = rng.standard_normal((2, 3, 8, 4, 4))
    assert np.abs(spectral_blend(g, l, np.ones((8, 4, 4))) - g).max() <= 1e-4
    assert np.abs(spectral_blend(g, l, np.zeros((8, 4, 4))) - l).max() <= 1e-4


def test_blend_spectrum_against_oracle(rng):
    g, l = rng.standard_normal((2, 2, 8, 4, 4))
    p = gaussian_lpf(8, 4, 4, 0.25).astype(np.float64)[None]
    out = spectral_blend(g, l, p[0])
    expected = p * dft3_oracle(g) + (1 - p) * dft3_oracle(l)
    assert np.abs(dft3_oracle(out) - expected).max() <= 1e-4
    assert np.abs(spectral_blend_spectrum(g, l, p[0]) - expected).max() <= 1e-4


def test_blend_shape_errors(rng):
    g = rng.standard_normal((2, 8, 4, 4))
    with pytest.raises(DimensionError):
        spectral_blend(g, g[:, :4], gaussian_lpf(8, 4, 4))
    with pytest.raises(DimensionError):
        spectral_blend(g, g, gaussian_lpf(4, 4, 4))


# --- band energy ---


def test_constant_video_is_all_low():
    z = np.full((2, 16, 8, 8), 2.0)
    for domain, dims in (("temporal", [16]), ("spatial", [8, 8]), ("spatiotemporal", [16, 8, 8])):
        low, high = band_mask(domain, dims)
        assert band_energy_fraction(z, low) == pytest.approx(1.0)
        assert band_energy_fraction(z, high) == pytest.approx(0.0, abs=1e-12)


def test_alternating_frames_are_all_high():
    z = np.ones((1, 16, 4, 4)) * np.array([(-1) ** n for n in range(16)])[None, :, None, None]
    _, high = band_mask("temporal", [16])
    assert band_energy_fraction(z, high) == pytest.approx(1.0)


def test_white_noise_low_fraction_matches_bin_share():
    low, _ = band_mask("spatiotemporal", [16, 8, 8])
    share = low.bins.sum() / low.bins.size  # 47 / 1024
    assert low.bins.sum() == 47
    for seed in range(50):
        z = np.random.default_rng(seed).standard_normal((4, 16, 8, 8))
        assert abs(band_energy_fraction(z, low) - share) <= 0.05


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["temporal", "spatial", "spatiotemporal"]), st.floats(0.05, 0.95), st.integers(0, 2**32 - 1))
def test_fractions_sum_to_one(domain, split, seed):
    z = np.random.default_rng(seed).standard_normal((2, 6, 5, 4))
    dims = {"temporal": [6], "spatial": [5, 4], "spatiotemporal": [6, 5, 4]}[domain]
    low, high = band_mask(domain, dims, split)
    assert abs(band_energy_fraction(z, low) + band_energy_fraction(z, high) - 1) <= 1e-6


def test_zero_input_has_undefined_fraction():
    low, _ = band_mask("spatial", [4, 4])
    with pytest.raises(UndefinedFractionError):
        band_energy_fraction(np.zeros((1, 3, 4, 4)), low)


def test_mask_must_fit_feature():
    low, _ = band_mask("temporal", [8])
    with pytest.raises(DimensionError):
        band_energy_fraction(np.ones((1, 4, 2, 2)), low)


# --- ratios ---


def test_self_ratio_is_one(rng):
    z = rng.standard_normal((4, 16, 8, 8))
    for domain in ("temporal", "spatial", "spatiotemporal"):
        r = relative_band_ratio(z, z, domain)
        assert r == {"low": pytest.approx(1.0), "high": pytest.approx(1.0)}


def smooth_video(rng, shape=(4, 16, 8, 8)):
    """Random low-pass content: temporally and spatially smooth."""
    z = rng.standard_normal(shape)
    return np.fft.ifftn(np.fft.fftn(z, axes=(1, 2, 3)) * gaussian_lpf(*shape[1:], 0.2)[None], axes=(1, 2, 3)).real


def test_frame_noise_raises_temporal_high_ratio(rng):
    short = smooth_video(rng)
    long = short + 0.5 * short.std() * rng.standard_normal(short.shape)
    assert relative_band_ratio(long, short, "temporal")["high"] > 1


def test_blur_lowers_spatial_high_ratio(rng):
    short = rng.standard_normal((4, 16, 8, 8))
    assert relative_band_ratio(box_blur(short), short, "spatial")["high"] < 1


def test_zero_reference_fraction():
    short = np.full((1, 8, 4, 4), 1.0)  # no high-band energy
    long = np.random.default_rng(0).standard_normal((1, 8, 4, 4))
    with pytest.raises(UndefinedRatioError):
        relative_band_ratio(long, short, "temporal")


def test_channel_mismatch():
    with pytest.raises(DimensionError):
        relative_band_ratio(np.ones((2, 4, 2, 2)), np.ones((1, 4, 2, 2)), "temporal")


def test_band_report_keys():
    r = BandReport("spatial", 0.25, 0.7, 0.3, 1.0, 1.0)
    assert set(r.to_dict()) == {"domain", "split", "low_fraction", "high_fraction", "ratio_low", "ratio_high"}
