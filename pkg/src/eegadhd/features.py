"""Per-epoch band power / spectral entropy vectors and z-score normalisation."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dsp, spectral
from .errors import EEGError, ValidationError
from .ingest import CHANNELS, Epoch, parse_label

FEATURE_KINDS = ("power", "entropy")
PSD_SOURCES = ("filtered", "broadband")


def n_features(n_bands: int = 5) -> int:
    return len(CHANNELS) * n_bands * len(FEATURE_KINDS)


def feature_names(n_bands: int = 5) -> list[str]:
    return [f"f{i:03d}" for i in range(n_features(n_bands))]


def feature_index(channel: int, band: int, kind: int, n_bands: int = 5) -> int:
    """Flat position of (channel, band, kind): channel-major, band next, kind innermost."""
    return (channel * n_bands + band) * len(FEATURE_KINDS) + kind


def features_from_bands(band_data: dict, bands, wcfg, psd_source: str = "filtered",
                        broadband=None, epsilon: float = 1e-8) -> np.ndarray:
    """Feature vector from already band-split data.

    ``band_data`` maps band name -> (n, n_channels). With ``psd_source='broadband'``
    one PSD of ``broadband`` is sliced per band instead.
    """
    if psd_source not in PSD_SOURCES:
        raise ValidationError(f"unknown psd_source {psd_source!r}")
    out = np.empty((len(CHANNELS), len(bands), 2))
    if psd_source == "broadband":
        psd = spectral.welch_psd(broadband, wcfg)
    for j, band in enumerate(bands):
        if psd_source == "filtered":
            psd = spectral.welch_psd(band_data[band.name], wcfg)
        out[:, j, 0] = spectral.band_power(psd, band)
        out[:, j, 1] = spectral.band_entropy(psd, band, epsilon)
    return out.reshape(-1)


@dataclass
class FeatureVector:
    subject_id: str
    label: str
    values: np.ndarray


def extract(epoch: Epoch, bands=dsp.DEFAULT_BANDS, wcfg=None, psd_source: str = "filtered",
            order: int = 5, mode: str = "zero_phase") -> FeatureVector:
    """Decompose one epoch into ``bands`` and compute its feature vector."""
    wcfg = wcfg or spectral.WelchConfig()
    try:
        split = dsp.decompose(epoch.data, wcfg.sample_rate, bands, order, mode)
        values = features_from_bands(split, bands, wcfg, psd_source, broadband=epoch.data)
    except EEGError as exc:
        raise type(exc)(f"{epoch.subject_id} epoch {epoch.index}: {exc}") from None
    return FeatureVector(epoch.subject_id, epoch.label, values)


@dataclass
class FeatureMatrix:
    X: np.ndarray
    labels: list
    subject_ids: list

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        if not (len(self.X) == len(self.labels) == len(self.subject_ids)):
            raise ValidationError("feature matrix rows, labels and subject ids differ in length")

    def __len__(self):
        return len(self.X)

    @property
    def y(self) -> np.ndarray:
        """1 for ADHD, 0 for Control."""
        return np.array([lab == "ADHD" for lab in self.labels], dtype=np.int64)

    @classmethod
    def from_vectors(cls, vectors) -> "FeatureMatrix":
        vectors = list(vectors)
        if not vectors:
            raise ValidationError("no feature vectors")
        return cls(np.stack([v.values for v in vectors]),
                   [v.label for v in vectors], [v.subject_id for v in vectors])

    def by_subject(self) -> "FeatureMatrix":
        """Average rows per subject, in first-appearance order."""
        order = list(dict.fromkeys(self.subject_ids))
        sids = np.asarray(self.subject_ids)
        rows, labels = [], []
        for sid in order:
            sel = sids == sid
            rows.append(self.X[sel].mean(axis=0))
            labels.append(self.labels[int(np.argmax(sel))])
        return FeatureMatrix(np.stack(rows), labels, order)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["subject_id", "label", *(f"f{i:03d}" for i in range(self.X.shape[1]))])
            for sid, lab, row in zip(self.subject_ids, self.labels, self.X):
                w.writerow([sid, lab, *(repr(float(v)) for v in row)])

    @classmethod
    def from_csv(cls, path) -> "FeatureMatrix":
        path = Path(path)
        if not path.is_file():
            raise ValidationError(f"missing features file {path}")
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[:2] != ["subject_id", "label"]:
                raise ValidationError(f"{path}: header must start with subject_id,label")
            sids, labels, rows = [], [], []
            for line in reader:
                sids.append(line[0])
                labels.append(parse_label(line[1]))
                rows.append([float(v) for v in line[2:]])
        if not rows:
            raise ValidationError(f"{path}: no rows")
        return cls(np.array(rows), labels, sids)


@dataclass
class NormalizationStats:
    mu: np.ndarray
    sigma: np.ndarray

    @property
    def constant(self) -> np.ndarray:
        return self.sigma == 0


def fit_normalizer(rows) -> NormalizationStats:
    """Per-column mean and population standard deviation."""
    X = np.asarray(getattr(rows, "X", rows), dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValidationError("normaliser needs at least 2 rows")
    return NormalizationStats(X.mean(axis=0), X.std(axis=0))


def transform(rows, stats: NormalizationStats) -> np.ndarray:
    X = np.asarray(getattr(rows, "X", rows), dtype=np.float64)
    if X.shape[-1] != stats.mu.shape[0]:
        raise ValidationError(
            f"column count {X.shape[-1]} does not match normaliser ({stats.mu.shape[0]})"
        )
    safe = np.where(stats.constant, 1.0, stats.sigma)
    return np.where(stats.constant, 0.0, (X - stats.mu) / safe)
