"""Butterworth bandpass design and (zero-phase) second-order-section filtering."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.signal

from . import _accel
from .errors import ValidationError


@dataclass(frozen=True)
class BandSpec:
    name: str
    f_low: float
    f_high: float

    def __post_init__(self):
        if not self.name:
            raise ValidationError("band needs a name")
        if not 0 < self.f_low < self.f_high:
            raise ValidationError(
                f"band {self.name}: need 0 < f_low < f_high, got [{self.f_low}, {self.f_high}]"
            )

    def check(self, fs: float) -> None:
        if self.f_high >= fs / 2:
            raise ValidationError(
                f"band {self.name}: edge {self.f_high} Hz >= Nyquist {fs / 2} Hz"
            )


DEFAULT_BANDS = (
    BandSpec("Delta", 0.5, 4.0),
    BandSpec("Theta", 4.0, 8.0),
    BandSpec("Alpha", 8.0, 13.0),
    BandSpec("Beta", 13.0, 30.0),
    BandSpec("Gamma", 30.0, 50.0),
)
BROADBAND = BandSpec("Broadband", 0.5, 50.0)

FILTER_MODES = ("causal", "zero_phase")


@dataclass(frozen=True)
class FilterSpec:
    """Cascade of biquads ``(b0, b1, b2, a1, a2)`` with ``a0 = 1`` and an overall gain."""

    order: int
    band: BandSpec
    fs: float
    sections: tuple
    gain: float

    @property
    def sos(self) -> np.ndarray:
        """(n_sections, 6) array in ``b0 b1 b2 a0 a1 a2`` layout, gain spread evenly."""
        sec = np.asarray(self.sections, dtype=np.float64)
        g = self.gain ** (1.0 / len(sec))
        return np.column_stack([sec[:, :3] * g, np.ones(len(sec)), sec[:, 3:]])

    def poles(self) -> np.ndarray:
        return np.concatenate([np.roots([1.0, a1, a2]) for *_, a1, a2 in self.sections])

    def response(self, freqs) -> np.ndarray:
        """Complex single-pass frequency response at ``freqs`` (Hz)."""
        z = np.exp(1j * 2 * np.pi * np.asarray(freqs, dtype=np.float64) / self.fs)
        h = np.full(z.shape, self.gain, dtype=complex)
        for b0, b1, b2, a1, a2 in self.sections:
            h *= (b0 * z**2 + b1 * z + b2) / (z**2 + a1 * z + a2)
        return h

    @property
    def padlen(self) -> int:
        return 3 * (2 * self.order + 1)


def _butter_prototype_poles(order: int) -> np.ndarray:
    k = np.arange(1, order + 1)
    return np.exp(1j * np.pi * (2 * k + order - 1) / (2 * order))


def design_bandpass(order: int, band: BandSpec, fs: float) -> FilterSpec:
    """Order-``order`` Butterworth bandpass, bilinear-discretised with prewarped edges.

    The analog lowpass prototype is shifted to the band by s -> (s^2 + w0^2) / (s * bw),
    which doubles the pole count; zeros land at z = +1 and z = -1, one of each per biquad.
    """
    if int(order) != order or order < 1:
        raise ValidationError(f"filter order must be a positive integer, got {order}")
    band.check(fs)
    return _design_cached(int(order), band, float(fs))


@lru_cache(maxsize=256)
def _design_cached(order: int, band: BandSpec, fs: float) -> FilterSpec:
    w1 = 2 * fs * np.tan(np.pi * band.f_low / fs)
    w2 = 2 * fs * np.tan(np.pi * band.f_high / fs)
    w0 = np.sqrt(w1 * w2)
    bw = w2 - w1

    half = _butter_prototype_poles(order) * bw / 2
    disc = np.sqrt(half**2 - w0**2 + 0j)
    s_poles = np.concatenate([half + disc, half - disc])
    z_poles = (2 * fs + s_poles) / (2 * fs - s_poles)

    tol = 1e-10
    reals = np.sort(z_poles[np.abs(z_poles.imag) < tol].real)
    upper = z_poles[z_poles.imag >= tol]
    if len(reals) % 2:
        raise AssertionError("odd number of real poles")  # cannot happen for a bandpass

    sections = []
    for p in upper:
        sections.append((1.0, 0.0, -1.0, -2.0 * p.real, abs(p) ** 2))
    for r1, r2 in zip(reals[::2], reals[1::2]):
        sections.append((1.0, 0.0, -1.0, -(r1 + r2), r1 * r2))
    # poles nearest the unit circle go last
    sections.sort(key=lambda s: s[4])

    spec = FilterSpec(order, band, fs, tuple(sections), 1.0)
    f_center = fs / np.pi * np.arctan(w0 / (2 * fs))
    gain = 1.0 / abs(spec.response([f_center])[0])
    return FilterSpec(order, band, fs, tuple(sections), float(gain))


def sos_zi(sos: np.ndarray) -> np.ndarray:
    """Per-section initial state for the steady-state response to a unit step."""
    zi = np.empty((len(sos), 2))
    scale = 1.0
    for k, (b0, b1, b2, _, a1, a2) in enumerate(sos):
        lhs = np.array([[1.0 + a1, -1.0], [a2, 1.0]])
        rhs = np.array([b1 - a1 * b0, b2 - a2 * b0])
        zi[k] = scale * np.linalg.solve(lhs, rhs)
        scale *= (b0 + b1 + b2) / (1.0 + a1 + a2)
    return zi


def _sosfilt_loop(sos, x, zi):
    # transposed direct form II; x is (n, c), zi is (n_sections, 2, c) and updated in place.
    # Channels are the inner loop so their independent recursions overlap in the pipeline.
    n, c = x.shape
    y = x.copy()
    for s in range(sos.shape[0]):
        b0 = sos[s, 0]
        b1 = sos[s, 1]
        b2 = sos[s, 2]
        a1 = sos[s, 4]
        a2 = sos[s, 5]
        z0 = zi[s, 0].copy()
        z1 = zi[s, 1].copy()
        for i in range(n):
            for j in range(c):
                xi = y[i, j]
                yi = b0 * xi + z0[j]
                z0[j] = b1 * xi - a1 * yi + z1[j]
                z1[j] = b2 * xi - a2 * yi
                y[i, j] = yi
        zi[s, 0] = z0
        zi[s, 1] = z1
    return y


sosfilt_jit = _accel.njit(_sosfilt_loop)


def sosfilt_numpy(sos, x, zi):
    y, zf = scipy.signal.sosfilt(sos, x, axis=0, zi=zi)
    zi[...] = zf
    return y


sosfilt = _accel.pick(sosfilt_jit, sosfilt_numpy)


def _run(sos, x, zi):
    return sosfilt(np.ascontiguousarray(sos), np.ascontiguousarray(x), np.ascontiguousarray(zi))


def apply_filter(spec: FilterSpec, x, mode: str = "zero_phase") -> np.ndarray:
    """Filter each column of ``x`` (1-D input is treated as one channel).

    ``zero_phase`` runs forward then backward over an edge-value-padded copy, giving zero
    phase and a squared magnitude response; ``causal`` is a single forward pass from rest.
    """
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    if x.ndim != 2:
        raise ValidationError(f"expected a (n_samples, n_channels) array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("non-finite values in filter input")
    sos = spec.sos
    n, c = x.shape

    if mode == "causal":
        y = _run(sos, x, np.zeros((len(sos), 2, c)))
    elif mode == "zero_phase":
        pad = spec.padlen
        if n <= pad:
            raise ValidationError(
                f"signal of {n} samples too short for zero-phase filtering (need > {pad})"
            )
        ext = np.concatenate([np.repeat(x[:1], pad, axis=0), x, np.repeat(x[-1:], pad, axis=0)])
        zi = sos_zi(sos)[:, :, None]
        fwd = _run(sos, ext, zi * ext[0])
        rev = fwd[::-1]
        y = _run(sos, rev, zi * rev[0])[::-1][pad:pad + n]
    else:
        raise ValidationError(f"unknown filter mode {mode!r}; expected one of {FILTER_MODES}")
    return y[:, 0] if squeeze else np.ascontiguousarray(y)


def decompose(x, fs: float, bands=DEFAULT_BANDS, order: int = 5, mode: str = "zero_phase") -> dict:
    """One filtered copy of ``x`` per band, keyed by band name."""
    specs = [design_bandpass(order, b, fs) for b in bands]
    return {s.band.name: apply_filter(s, x, mode) for s in specs}
