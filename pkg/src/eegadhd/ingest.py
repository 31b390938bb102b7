"""Recordings, manifests and epoch segmentation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError

CHANNELS = (
    "Fz", "Cz", "Pz", "C3", "T3", "C4", "T4", "Fp1", "Fp2", "F3",
    "F4", "F7", "F8", "P3", "P4", "T5", "T6", "O1", "O2",
)
LABELS = ("ADHD", "Control")
DEFAULT_FS = 128.0


def parse_label(text: str) -> str:
    for lab in LABELS:
        if text.strip().lower() == lab.lower():
            return lab
    raise ValidationError(f"unknown label {text!r}; expected one of {LABELS}")


@dataclass
class Recording:
    subject_id: str
    label: str
    samples: np.ndarray  # (n_samples, 19)
    sample_rate_hz: float = DEFAULT_FS
    channels: tuple = CHANNELS

    def __post_init__(self):
        self.label = parse_label(self.label)
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if tuple(self.channels) != CHANNELS:
            raise ValidationError(f"{self.subject_id}: channels must be {CHANNELS} in order")
        if self.samples.ndim != 2 or self.samples.shape[1] != len(CHANNELS):
            raise ValidationError(
                f"{self.subject_id}: wrong channel count, samples shape {self.samples.shape}"
            )
        if not self.sample_rate_hz > 0:
            raise ValidationError(f"{self.subject_id}: sample rate must be positive")
        if not np.all(np.isfinite(self.samples)):
            bad = int(np.argwhere(~np.isfinite(self.samples))[0, 0])
            raise ValidationError(f"{self.subject_id}: non-finite sample at row {bad}")

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class EpochingPlan:
    epoch_len_samples: int = 1280
    step_samples: int = 640

    def __post_init__(self):
        if self.epoch_len_samples < 2:
            raise ValidationError("epoch_len_samples must be >= 2")
        if not 1 <= self.step_samples <= self.epoch_len_samples:
            raise ValidationError("step_samples must be in [1, epoch_len_samples]")

    def count(self, n_samples: int) -> int:
        if n_samples < self.epoch_len_samples:
            return 0
        return (n_samples - self.epoch_len_samples) // self.step_samples + 1

    def offsets(self, n_samples: int) -> np.ndarray:
        return np.arange(self.count(n_samples)) * self.step_samples


@dataclass
class Epoch:
    subject_id: str
    label: str
    index: int
    data: np.ndarray = field(repr=False)  # (epoch_len, 19)


def segment_array(x: np.ndarray, plan: EpochingPlan) -> np.ndarray:
    """Stack windows of ``x`` along a new leading axis: (n_epochs, epoch_len, ...)."""
    starts = plan.offsets(x.shape[0])
    if starts.size == 0:
        raise ValidationError(
            f"recording of {x.shape[0]} samples is shorter than one epoch "
            f"({plan.epoch_len_samples})"
        )
    return np.stack([x[s:s + plan.epoch_len_samples] for s in starts])


def segment(rec: Recording, plan: EpochingPlan) -> list[Epoch]:
    """Cut ``rec`` into overlapping epochs; a trailing partial window is dropped."""
    try:
        windows = segment_array(rec.samples, plan)
    except ValidationError as exc:
        raise ValidationError(f"{rec.subject_id}: {exc}") from None
    return [Epoch(rec.subject_id, rec.label, i, w) for i, w in enumerate(windows)]


def read_subject_csv(path, subject_id: str = "") -> np.ndarray:
    """Read a subject CSV and return samples in canonical channel order."""
    path = Path(path)
    who = subject_id or path.stem
    if not path.is_file():
        raise ValidationError(f"{who}: missing file {path}")
    with path.open(newline="") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise ValidationError(f"{who}: empty file {path}")
    header = [h.strip() for h in header]
    if len(header) != len(CHANNELS):
        raise ValidationError(
            f"{who}: wrong channel count ({len(header)} columns, expected {len(CHANNELS)})"
        )
    lookup = {c.lower(): i for i, c in enumerate(CHANNELS)}
    dest = []
    for name in header:
        if name.lower() not in lookup:
            raise ValidationError(f"{who}: unknown channel name {name!r}")
        dest.append(lookup[name.lower()])
    if len(set(dest)) != len(dest):
        raise ValidationError(f"{who}: duplicate channel names in header")
    try:
        body = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"{who}: unparseable numeric body: {exc}") from None
    if body.shape[1] != len(CHANNELS):
        raise ValidationError(f"{who}: wrong channel count in body ({body.shape[1]})")
    out = np.empty_like(body)
    out[:, dest] = body
    return out


def write_subject_csv(path, samples: np.ndarray) -> None:
    np.savetxt(path, samples, delimiter=",", header=",".join(CHANNELS), comments="", fmt="%.9g")


def load_manifest(path, sample_rate_hz: float = DEFAULT_FS) -> list[Recording]:
    """Load every subject listed in a ``subject_id,label,path`` manifest.

    Relative paths resolve against the manifest's directory. An optional
    ``sample_rate_hz`` column overrides the default rate per row.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"missing manifest {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        cols = {c.strip().lower() for c in reader.fieldnames or ()}
        missing = {"subject_id", "label", "path"} - cols
        if missing:
            raise ValidationError(f"manifest {path} lacks columns {sorted(missing)}")
        rows = [{k.strip().lower(): (v or "").strip() for k, v in row.items()} for row in reader]

    recs = []
    for row in rows:
        sid = row["subject_id"]
        data_path = Path(row["path"])
        if not data_path.is_absolute():
            data_path = path.parent / data_path
        fs = float(row["sample_rate_hz"]) if row.get("sample_rate_hz") else sample_rate_hz
        samples = read_subject_csv(data_path, sid)
        recs.append(Recording(sid, parse_label(row["label"]), samples, fs))
    return recs


def write_manifest(path, recordings, data_dir: str = "subjects") -> None:
    path = Path(path)
    (path.parent / data_dir).mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["subject_id", "label", "path"])
        for rec in recordings:
            rel = f"{data_dir}/{rec.subject_id}.csv"
            write_subject_csv(path.parent / rel, rec.samples)
            w.writerow([rec.subject_id, rec.label, rel])
