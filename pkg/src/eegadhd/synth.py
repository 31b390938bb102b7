"""Seeded synthetic 19-channel recordings with class-dependent band amplitudes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dsp
from .errors import ValidationError
from .ingest import CHANNELS, Recording

# RMS per band (microvolts). ADHD carries 1.5x the control theta, so the theta/beta
# ratio differs by 1.5 between classes.
CONTROL_PROFILE = {"Delta": 12.0, "Theta": 6.0, "Alpha": 9.0, "Beta": 5.0, "Gamma": 2.0}
ADHD_PROFILE = {**CONTROL_PROFILE, "Theta": 9.0}


@dataclass
class SynthSpec:
    n_per_class: int = 20
    n_samples: int = 7680  # 60 s at 128 Hz
    sample_rate: float = 128.0
    profiles: dict = field(default_factory=lambda: {"ADHD": dict(ADHD_PROFILE),
                                                    "Control": dict(CONTROL_PROFILE)})
    noise_rms: float = 1.0
    jitter: float = 0.1  # log-normal sigma of per-channel band gains
    subject_jitter: float = 0.2  # log-normal sigma of per-subject band gains (all channels)
    bands: tuple = dsp.DEFAULT_BANDS
    filter_order: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.n_per_class < 1:
            raise ValidationError("n_per_class must be >= 1")
        if min(self.noise_rms, self.jitter, self.subject_jitter) < 0:
            raise ValidationError("noise_rms and jitter terms must be >= 0")
        names = {b.name for b in self.bands}
        for label, prof in self.profiles.items():
            if set(prof) - names:
                raise ValidationError(f"profile {label} names unknown bands {set(prof) - names}")
            if any(v < 0 for v in prof.values()):
                raise ValidationError(f"profile {label} has a negative amplitude")


def band_noise(rng, n, n_ch, spec_filter: dsp.FilterSpec) -> np.ndarray:
    """White noise pushed through ``spec_filter`` and rescaled to unit RMS per channel."""
    x = dsp.apply_filter(spec_filter, rng.standard_normal((n, n_ch)), "zero_phase")
    rms = np.sqrt(np.mean(x**2, axis=0))
    return x / np.where(rms > 0, rms, 1.0)


def generate_one(spec: SynthSpec, label: str, subject_id: str, rng) -> Recording:
    n, n_ch = spec.n_samples, len(CHANNELS)
    prof = spec.profiles[label]
    x = spec.noise_rms * rng.standard_normal((n, n_ch))
    for band in spec.bands:
        amp = prof.get(band.name, 0.0)
        filt = dsp.design_bandpass(spec.filter_order, band, spec.sample_rate)
        noise = band_noise(rng, n, n_ch, filt)
        gains = amp * np.exp(spec.subject_jitter * rng.standard_normal()
                             + spec.jitter * rng.standard_normal(n_ch))
        x += noise * gains
    return Recording(subject_id, label, x, spec.sample_rate)


def generate(spec: SynthSpec = SynthSpec()) -> list[Recording]:
    """Recordings for ``n_per_class`` subjects of each class, interleaved, deterministic per seed."""
    if spec.n_samples < 2:
        raise ValidationError("n_samples too small")
    rng = np.random.default_rng(spec.seed)
    recs = []
    for i in range(spec.n_per_class):
        for label in spec.profiles:
            prefix = label.lower()[:4]
            recs.append(generate_one(spec, label, f"{prefix}{i:03d}", rng))
    return recs
