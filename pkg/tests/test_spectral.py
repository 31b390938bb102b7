import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from eegadhd.dsp import BandSpec
from eegadhd.errors import ValidationError
from eegadhd.oracles import oracle_dft_psd
from eegadhd.spectral import (PsdEstimate, WelchConfig, band_entropy, band_power, entropy_of,
                              welch_psd)

CFG = WelchConfig()
BETA = BandSpec("Beta", 13, 30)
DELTA = BandSpec("Delta", 0.5, 4)


def test_shape_and_frequencies():
    psd = welch_psd(np.zeros(1280), CFG)
    assert psd.freqs.shape == (129,) and psd.df == 0.5
    assert np.all(np.diff(psd.freqs) > 0) and psd.freqs[-1] == 64.0


def test_on_bin_sine():
    t = np.arange(1280) / 128
    psd = welch_psd(np.sin(2 * np.pi * 16 * t), CFG)
    assert np.argmax(psd.values) == 32
    assert np.sum(psd.values) * psd.df == pytest.approx(0.5, abs=1e-6)
    # everything off the 16 Hz bin is rounding noise
    assert np.delete(psd.values, 32).max() < 1e-20
    assert band_power(psd, BETA) == pytest.approx(psd.values[32], rel=1e-12)
    assert band_power(psd, DELTA) == pytest.approx(0.0, abs=1e-20)


def test_constant_signal():
    psd = welch_psd(np.full(1280, 3.0), CFG)
    assert np.sum(psd.values) * psd.df == pytest.approx(9.0, rel=1e-9)
    assert np.delete(psd.values, 0).max() < 1e-20


def test_white_noise_parseval_and_flatness(rng):
    x = rng.standard_normal(1280)
    psd = welch_psd(x, CFG)
    assert np.sum(psd.values) * psd.df == pytest.approx(np.mean(x**2), rel=1e-9)

    # long record so each band's estimate is tight; compare per-bin averages
    x = rng.standard_normal(256 * 100)
    psd = welch_psd(x, CFG)
    edges = [0.5, 4, 8, 13, 30, 50, 64]
    level = np.mean(psd.values[1:-1])
    for lo, hi in zip(edges, edges[1:]):
        band = BandSpec("b", lo, hi)
        n_bins = np.count_nonzero((psd.freqs >= lo) & (psd.freqs <= hi))
        assert band_power(psd, band) / n_bins == pytest.approx(level, rel=0.10)


def test_multichannel_matches_per_channel(rng):
    x = rng.standard_normal((1280, 4))
    psd = welch_psd(x, CFG)
    assert psd.values.shape == (4, 129)
    np.testing.assert_allclose(psd.values[2], welch_psd(x[:, 2], CFG).values, rtol=1e-12)


def test_hann_preserves_power_on_average(rng):
    x = rng.standard_normal(256 * 200)
    rect = welch_psd(x, CFG)
    hann = welch_psd(x, WelchConfig(window="hann", segment_overlap=128))
    assert np.sum(hann.values) == pytest.approx(np.sum(rect.values), rel=0.02)


def test_errors():
    with pytest.raises(ValidationError, match="exceeds signal length"):
        welch_psd(np.zeros(100), CFG)
    with pytest.raises(ValidationError):
        WelchConfig(segment_len=4)
    with pytest.raises(ValidationError):
        WelchConfig(segment_overlap=256)
    psd = welch_psd(np.ones(1280), CFG)
    with pytest.raises(ValidationError, match="no bins at this resolution"):
        band_power(psd, BandSpec("narrow", 10.1, 10.4))
    with pytest.raises(ValidationError, match="single bin"):
        band_entropy(psd, BandSpec("one", 9.9, 10.2))


def test_entropy_closed_forms():
    assert entropy_of(np.ones(8)) == pytest.approx(np.log(8), abs=1e-4)
    spike = np.zeros(8)
    spike[3] = 5.0
    assert abs(entropy_of(spike)) < 1e-6  # -p*log(p+eps) dips just below 0
    assert entropy_of([0.5, 0.25, 0.25]) == pytest.approx(1.0397, abs=1e-4)
    with pytest.raises(ValidationError):
        entropy_of(np.zeros(8))


def test_band_entropy_uses_inclusive_edges():
    freqs = np.arange(0, 64.5, 0.5)
    psd = PsdEstimate(freqs, np.ones_like(freqs))
    # [8, 11.5] holds exactly the 8 bins 8.0 .. 11.5
    assert band_entropy(psd, BandSpec("a", 8, 11.5)) == pytest.approx(np.log(8), abs=1e-4)


@pytest.mark.parametrize("seed", range(10))
def test_single_segment_matches_naive_dft(seed):
    x = np.random.default_rng(seed).standard_normal(256)
    ref = oracle_dft_psd(x, 256, 128.0)
    got = welch_psd(x, CFG)
    np.testing.assert_allclose(got.values, ref.values, rtol=1e-9)
    np.testing.assert_allclose(got.freqs, ref.freqs)


def test_oracle_on_16_sample_ramp():
    x = np.arange(16.0)
    # textbook DFT of a ramp: X_0 = 120, X_k = -8 + 8j*cot(pi k / 16)
    k = np.arange(1, 9)
    mag2 = 64 + 64 / np.tan(np.pi * k / 16) ** 2
    expect = np.concatenate([[120.0**2], mag2]) / 16
    expect[1:-1] *= 2
    np.testing.assert_allclose(oracle_dft_psd(x, 16, 1.0).values, expect, rtol=1e-9)


signals = arrays(np.float64, 512, elements=st.floats(-100, 100, allow_nan=False))


@settings(max_examples=40, deadline=None)
@given(x=signals, a=st.floats(1e-3, 1e3))
def test_scale_covariance_and_entropy_invariance(x, a):
    p1 = welch_psd(x, CFG)
    p2 = welch_psd(a * x, CFG)
    np.testing.assert_allclose(p2.values, a * a * p1.values, rtol=1e-12, atol=1e-300)
    band = BandSpec("b", 8, 30)
    if band_power(p1, band) > 1e-12 * max(p1.values.max(), 1e-300):
        assert band_entropy(p2, band) == pytest.approx(band_entropy(p1, band), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(x=signals)
def test_parseval_property(x):
    psd = welch_psd(x, CFG)
    seg_ms = np.mean([np.mean(s**2) for s in x.reshape(2, 256)])
    assert np.sum(psd.values) * psd.df == pytest.approx(seg_ms, rel=1e-9, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(v=arrays(np.float64, st.integers(2, 40), elements=st.floats(0, 1e6)))
def test_entropy_bounds(v):
    if v.sum() <= 0:
        return
    h = entropy_of(v)
    assert -1e-8 <= h <= np.log(len(v)) + 1e-8
