"""Averaged-periodogram PSD, band power and band spectral entropy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

WINDOWS = ("rectangular", "hann")


@dataclass(frozen=True)
class WelchConfig:
    segment_len: int = 256
    segment_overlap: int = 0
    window: str = "rectangular"
    sample_rate: float = 128.0

    def __post_init__(self):
        if self.segment_len < 8:
            raise ValidationError("segment_len must be >= 8")
        if not 0 <= self.segment_overlap < self.segment_len:
            raise ValidationError("segment_overlap must be in [0, segment_len)")
        if self.window not in WINDOWS:
            raise ValidationError(f"unknown window {self.window!r}; expected one of {WINDOWS}")
        if not self.sample_rate > 0:
            raise ValidationError("sample_rate must be positive")

    @property
    def step(self) -> int:
        return self.segment_len - self.segment_overlap

    def taper(self) -> np.ndarray:
        if self.window == "hann":
            # periodic Hann
            return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(self.segment_len) / self.segment_len)
        return np.ones(self.segment_len)


@dataclass
class PsdEstimate:
    freqs: np.ndarray
    values: np.ndarray  # (..., n_freqs); leading axes are channels when estimated in bulk

    @property
    def df(self) -> float:
        return float(self.freqs[1] - self.freqs[0])


def one_sided_scale(n_fft: int) -> np.ndarray:
    w = np.full(n_fft // 2 + 1, 2.0)
    w[0] = 1.0
    if n_fft % 2 == 0:
        w[-1] = 1.0
    return w


def welch_psd(x, cfg: WelchConfig) -> PsdEstimate:
    """Average of ``|DFT_k|^2 / (N_w * F_s)`` over segments, one-sided.

    ``x`` may be 1-D or ``(n_samples, n_channels)``; for the latter the result has
    shape ``(n_channels, n_freqs)``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] < cfg.segment_len:
        raise ValidationError(
            f"segment length {cfg.segment_len} exceeds signal length {x.shape[0]}"
        )
    if not np.all(np.isfinite(x)):
        raise ValidationError("non-finite values in PSD input")
    win = cfg.taper()
    win_ms = np.mean(win**2)
    if win_ms == 0:
        raise ValidationError("all-zero window")

    nw = cfg.segment_len
    n_seg = (x.shape[0] - nw) // cfg.step + 1
    idx = np.arange(n_seg)[:, None] * cfg.step + np.arange(nw)
    segs = np.moveaxis(x[idx], 1, -1)  # (n_seg, [channels,] nw)
    spec = np.fft.rfft(segs * win, axis=-1)
    pxx = np.mean(np.abs(spec) ** 2, axis=0) / (nw * cfg.sample_rate * win_ms)
    pxx *= one_sided_scale(nw)
    freqs = np.fft.rfftfreq(nw, d=1.0 / cfg.sample_rate)
    return PsdEstimate(freqs, pxx)


def band_mask(freqs, band) -> np.ndarray:
    freqs = np.asarray(freqs)
    mask = (freqs >= band.f_low) & (freqs <= band.f_high)
    if not mask.any():
        raise ValidationError(f"band {band.name} has no bins at this resolution")
    return mask


def band_power(psd: PsdEstimate, band) -> np.ndarray | float:
    """Sum of PSD values over bins inside the closed band interval (no ``df`` factor)."""
    out = psd.values[..., band_mask(psd.freqs, band)].sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def entropy_of(values, epsilon: float = 1e-8) -> np.ndarray | float:
    """Shannon entropy (nats) of non-negative ``values`` normalised along the last axis."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] < 2:
        raise ValidationError("entropy needs at least 2 bins")
    total = values.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise ValidationError("band has zero power; entropy undefined")
    p = values / total
    out = -np.sum(p * np.log(p + epsilon), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def band_entropy(psd: PsdEstimate, band, epsilon: float = 1e-8) -> np.ndarray | float:
    mask = band_mask(psd.freqs, band)
    if mask.sum() < 2:
        raise ValidationError(f"band {band.name} has a single bin; entropy is degenerate")
    return entropy_of(psd.values[..., mask], epsilon)
