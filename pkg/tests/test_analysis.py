import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specblend.analysis import AnalysisRequest, compare_bands, frequency_report, reports_to_csv, temporal_flicker
from specblend.errors import AnalysisError, ParameterError, ValidationError
from specblend.spectral import gaussian_lpf
from specblend.tensorio import write_tensor


def loop_flicker(v):
    C, N, h, w = v.shape
    total, count = 0.0, 0
    for c in range(C):
        for t in range(N - 1):
            for y in range(h):
                for x in range(w):
                    total += abs(v[c, t + 1, y, x] - v[c, t, y, x])
                    count += 1
    return total / count


def smooth(rng, shape):
    z = rng.standard_normal(shape)
    return np.fft.ifftn(np.fft.fftn(z, axes=(1, 2, 3)) * gaussian_lpf(*shape[1:], 0.2)[None], axes=(1, 2, 3)).real


def test_self_report_is_all_ones(rng):
    z = rng.standard_normal((4, 32, 8, 8))
    reports = compare_bands(z, z)
    assert [r.domain for r in reports] == ["spatial", "temporal", "spatiotemporal"]
    for r in reports:
        assert abs(r.ratio_low - 1) <= 1e-6 and abs(r.ratio_high - 1) <= 1e-6
        assert abs(r.low_fraction + r.high_fraction - 1) <= 1e-6


def test_report_directions(rng):
    base = smooth(rng, (4, 16, 8, 8))
    noisy = base + 0.5 * base.std() * rng.standard_normal(base.shape)
    (temporal,) = compare_bands(noisy, base, domains=("temporal",))
    assert temporal.ratio_high > 1
    blurred = sum(np.roll(base, (a, b), axis=(2, 3)) for a in (-1, 0, 1) for b in (-1, 0, 1)) / 9
    (spatial,) = compare_bands(blurred, base, domains=("spatial",))
    assert spatial.ratio_high < 1


def test_baseline_longer_than_video_is_rejected(rng):
    with pytest.raises(ValidationError):
        compare_bands(rng.standard_normal((1, 8, 4, 4)), rng.standard_normal((1, 16, 4, 4)))


def test_shorter_baseline_is_analyzed_at_own_length(rng):
    reports = compare_bands(rng.standard_normal((2, 128, 4, 4)), rng.standard_normal((2, 16, 4, 4)))
    assert len(reports) == 3


def test_undefined_fraction_names_domain():
    with pytest.raises(AnalysisError, match="temporal"):
        compare_bands(np.ones((1, 8, 2, 2)), np.ones((1, 8, 2, 2)), domains=("temporal",))


def test_request_validation():
    with pytest.raises(ParameterError):
        AnalysisRequest("a", "b", split=1.0)
    with pytest.raises(ParameterError):
        AnalysisRequest("a", "b", domains=("spectral",))


def test_frequency_report_from_files(tmp_path, rng):
    z = rng.standard_normal((2, 16, 4, 4)).astype(np.float32)
    write_tensor(z, tmp_path / "v.vlt")
    reports = frequency_report(AnalysisRequest(str(tmp_path / "v.vlt"), str(tmp_path / "v.vlt"), domains=("spatial",)))
    assert reports[0].ratio_high == pytest.approx(1.0)


def test_csv_has_row_per_domain_and_band(rng):
    z = rng.standard_normal((2, 16, 4, 4))
    lines = reports_to_csv(compare_bands(z, z), {"video_flicker_mad": 0.5}).strip().splitlines()
    assert lines[0] == "domain,band,split,fraction,ratio,video_flicker_mad"
    assert len(lines) == 1 + 6


def test_flicker_cases(rng):
    assert temporal_flicker(np.full((2, 5, 3, 3), 7.0)) == 0.0
    alt = np.zeros((1, 6, 2, 2))
    alt[:, 1::2] = 1
    assert temporal_flicker(alt) == 1.0
    v = rng.standard_normal((1, 4, 2, 2))
    assert temporal_flicker(v) == pytest.approx(loop_flicker(v), abs=1e-12)


def test_flicker_needs_two_frames():
    with pytest.raises(ParameterError):
        temporal_flicker(np.ones((1, 1, 2, 2)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-5, 5), st.floats(-10, 10))
def test_flicker_invariances(seed, scale, shift):
    v = np.random.default_rng(seed).standard_normal((2, 6, 3, 2))
    f = temporal_flicker(v)
    assert temporal_flicker(v[:, ::-1]) == pytest.approx(f, abs=1e-12)
    assert temporal_flicker(v + shift) == pytest.approx(f, abs=1e-9)
    assert abs(temporal_flicker(scale * v) - abs(scale) * f) <= 1e-6
