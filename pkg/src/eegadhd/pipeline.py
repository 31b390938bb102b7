"""Recording -> cleaned signal -> band signals -> epochs -> feature matrix."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import dsp
from .config import PipelineConfig
from .errors import EEGError
from .features import FeatureMatrix, FeatureVector, features_from_bands
from .ingest import Recording, segment_array


def default_jobs() -> int:
    return os.cpu_count() or 1


def preprocess(samples, cfg: PipelineConfig) -> tuple[np.ndarray, dict]:
    """Broadband clean-up followed by the band split, both on the continuous signal."""
    bb = dsp.design_bandpass(cfg.filter_order, cfg.broadband, cfg.sample_rate)
    clean = dsp.apply_filter(bb, samples, cfg.filter_mode)
    bands = dsp.decompose(clean, cfg.sample_rate, cfg.bands, cfg.filter_order, cfg.filter_mode)
    return clean, bands


def epoch_features(samples, cfg: PipelineConfig) -> np.ndarray:
    """(n_epochs, n_features) for one continuous multichannel signal."""
    clean, bands = preprocess(samples, cfg)
    clean_ep = segment_array(clean, cfg.epoch)
    band_ep = {name: segment_array(x, cfg.epoch) for name, x in bands.items()}
    rows = []
    for i in range(len(clean_ep)):
        split = {name: ep[i] for name, ep in band_ep.items()}
        try:
            rows.append(features_from_bands(split, cfg.bands, cfg.welch, cfg.psd_source,
                                            broadband=clean_ep[i], epsilon=cfg.epsilon))
        except EEGError as exc:
            raise type(exc)(f"epoch {i}: {exc}") from None
    return np.stack(rows)


def recording_features(rec: Recording, cfg: PipelineConfig) -> list[FeatureVector]:
    if rec.sample_rate_hz != cfg.sample_rate:
        raise EEGError(f"{rec.subject_id}: sample rate {rec.sample_rate_hz} Hz does not match "
                       f"configured {cfg.sample_rate} Hz")
    try:
        rows = epoch_features(rec.samples, cfg)
    except EEGError as exc:
        raise type(exc)(f"{rec.subject_id}: {exc}") from None
    return [FeatureVector(rec.subject_id, rec.label, r) for r in rows]


def extract_features(recordings, cfg: PipelineConfig, jobs: int = 1) -> FeatureMatrix:
    """Feature matrix over all recordings; row order follows input order regardless of ``jobs``."""
    recordings = list(recordings)
    if jobs > 1 and len(recordings) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_rec = list(pool.map(recording_features, recordings, [cfg] * len(recordings)))
    else:
        per_rec = [recording_features(r, cfg) for r in recordings]
    return FeatureMatrix.from_vectors(v for vecs in per_rec for v in vecs)
