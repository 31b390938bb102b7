import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eegadhd import dsp
from eegadhd.dsp import BandSpec, apply_filter, decompose, design_bandpass
from eegadhd.errors import ValidationError

FS = 128.0
ALPHA = BandSpec("Alpha", 8.0, 13.0)


def db(x):
    return 20 * np.log10(np.abs(x))


def test_broadband_design_is_stable_and_flat_midband():
    spec = design_bandpass(5, dsp.BROADBAND, FS)
    assert np.all(np.abs(spec.poles()) < 1)
    assert abs(db(spec.response([25.0])[0])) < 0.1
    assert len(spec.sections) == 5


def test_order1_alpha_edges_at_minus_3db():
    spec = design_bandpass(1, ALPHA, FS)
    np.testing.assert_allclose(db(spec.response([8.0, 13.0])), -3.0103, atol=0.2)


def test_edge_beyond_nyquist_rejected():
    with pytest.raises(ValidationError, match="Nyquist"):
        design_bandpass(5, BandSpec("bad", 30, 70), FS)
    with pytest.raises(ValidationError):
        BandSpec("flat", 8, 8)
    with pytest.raises(ValidationError):
        design_bandpass(0, ALPHA, FS)


def test_sos_layout_matches_response():
    # response() evaluates sections + gain; sos folds the gain in. Both must agree.
    spec = design_bandpass(5, ALPHA, FS)
    f = np.linspace(0.5, 63, 50)
    z = np.exp(2j * np.pi * f / FS)
    h = np.ones_like(z)
    for b0, b1, b2, a0, a1, a2 in spec.sos:
        h *= (b0 + b1 / z + b2 / z**2) / (a0 + a1 / z + a2 / z**2)
    np.testing.assert_allclose(h, spec.response(f), rtol=1e-10)


def test_dc_is_removed():
    spec = design_bandpass(5, dsp.BROADBAND, FS)
    y = apply_filter(spec, np.ones(4000), "causal")
    assert abs(y[-1]) < 1e-6
    y = apply_filter(spec, np.ones(4000), "zero_phase")
    assert np.max(np.abs(y)) < 1e-6


def test_alpha_passes_10hz_with_zero_phase():
    spec = design_bandpass(5, ALPHA, FS)
    t = np.arange(2560) / FS
    x = np.sin(2 * np.pi * 10 * t)
    y = apply_filter(spec, x, "zero_phase")
    mid = slice(640, 1920)
    # least-squares fit of a*sin + b*cos on the settled middle
    A = np.column_stack([np.sin(2 * np.pi * 10 * t[mid]), np.cos(2 * np.pi * 10 * t[mid])])
    a, b = np.linalg.lstsq(A, y[mid], rcond=None)[0]
    expected = np.abs(spec.response([10.0])[0]) ** 2
    assert 0.9 <= np.hypot(a, b) <= 1.0
    assert np.hypot(a, b) == pytest.approx(expected, rel=1e-3)
    assert abs(np.arctan2(b, a)) < 1e-3


def test_alpha_rejects_45hz():
    spec = design_bandpass(5, ALPHA, FS)
    t = np.arange(2560) / FS
    x = np.sin(2 * np.pi * 45 * t)
    y = apply_filter(spec, x, "causal")
    ratio = np.sqrt(np.mean(y[640:] ** 2) / np.mean(x[640:] ** 2))
    assert ratio < 0.01
    assert ratio == pytest.approx(np.abs(spec.response([45.0])[0]), rel=0.05, abs=1e-7)


def test_zero_phase_input_checks():
    spec = design_bandpass(5, ALPHA, FS)
    with pytest.raises(ValidationError, match="too short"):
        apply_filter(spec, np.zeros(spec.padlen), "zero_phase")
    with pytest.raises(ValidationError, match="non-finite"):
        apply_filter(spec, np.array([0.0, np.inf] * 50), "causal")
    with pytest.raises(ValidationError, match="unknown filter mode"):
        apply_filter(spec, np.zeros(100), "acausal")


def test_decompose_shapes_and_zero_input():
    out = decompose(np.zeros((1280, 19)), FS)
    assert list(out) == [b.name for b in dsp.DEFAULT_BANDS]
    assert all(v.shape == (1280, 19) and not v.any() for v in out.values())


def test_band_powers_tile_broadband_white_noise(rng):
    x = rng.standard_normal((12800, 4))
    bb = apply_filter(design_bandpass(5, dsp.BROADBAND, FS), x)
    total = sum(np.mean(v**2) for v in decompose(x, FS).values())
    assert total == pytest.approx(np.mean(bb**2), rel=0.15)


def test_linearity(rng):
    spec = design_bandpass(5, ALPHA, FS)
    x, y = rng.standard_normal((2, 1000, 3))
    a, b = 2.5, -0.7
    for mode in dsp.FILTER_MODES:
        lhs = apply_filter(spec, a * x + b * y, mode)
        rhs = a * apply_filter(spec, x, mode) + b * apply_filter(spec, y, mode)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * np.abs(rhs).max())


def test_zero_phase_xcorr_peaks_at_lag_zero(rng):
    spec = design_bandpass(5, ALPHA, FS)
    x = apply_filter(spec, rng.standard_normal(4096))  # band-limited input
    y = apply_filter(spec, x)
    lags = np.arange(-20, 21)
    xc = [np.dot(x[50:-50], np.roll(y, k)[50:-50]) for k in lags]
    assert lags[int(np.argmax(xc))] == 0


@pytest.mark.parametrize("band", [*dsp.DEFAULT_BANDS, dsp.BROADBAND], ids=lambda b: b.name)
def test_monotone_stopbands(band):
    spec = design_bandpass(5, band, FS)
    lo = np.linspace(1e-3, band.f_low, 200)
    hi = np.linspace(band.f_high, FS / 2 - 1e-3, 200)
    assert np.all(np.diff(np.abs(spec.response(lo))) > 0)
    assert np.all(np.diff(np.abs(spec.response(hi))) < 0)


@settings(max_examples=60, deadline=None)
@given(order=st.integers(1, 8), lo=st.floats(0.2, 55.0), width=st.floats(0.3, 40.0))
def test_designs_are_stable(order, lo, width):
    hi = lo + width
    if hi >= FS / 2 - 0.1:
        return
    spec = design_bandpass(order, BandSpec("b", lo, hi), FS)
    assert np.all(np.abs(spec.poles()) < 1)
    np.testing.assert_allclose(db(spec.response([lo, hi])), -3.0103, atol=0.05)


def test_multichannel_filters_each_column_independently(rng):
    spec = design_bandpass(5, ALPHA, FS)
    x = rng.standard_normal((800, 3))
    y = apply_filter(spec, x)
    np.testing.assert_allclose(y[:, 1], apply_filter(spec, x[:, 1]), rtol=1e-12, atol=1e-14)
    assert y.shape == x.shape
