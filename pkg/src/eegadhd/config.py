"""Pipeline configuration: one TOML file, validated at load, hashed into every output."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import dsp
from .errors import ValidationError
from .eval import FOLD_MODES, NORM_SCOPES
from .features import PSD_SOURCES
from .ingest import EpochingPlan
from .model.gbt import GBTClassifier, GbtParams
from .model.svm import KERNELS, SVC, KernelSpec
from .spectral import WelchConfig

UNITS = ("epoch", "subject")
MODELS = ("svm", "gbt")


@dataclass(frozen=True)
class SvmConfig:
    kernel: str = "rbf"
    kernels: tuple = KERNELS
    C: float = 1.0
    gamma: float | str = "scale"
    degree: int = 3
    coef0: float = 0.0
    tol: float = 1e-3
    max_passes: int = 10
    max_iter: int = 1_000_000

    def kernel_spec(self, kind: str | None = None) -> KernelSpec:
        kind = kind or self.kernel
        if self.gamma == "scale":
            return KernelSpec(kind, "scale", 0.0, self.degree, self.coef0)
        return KernelSpec(kind, "fixed", float(self.gamma), self.degree, self.coef0)


@dataclass(frozen=True)
class SvmFactory:
    cfg: SvmConfig
    kernel: str

    def build(self, fold: int = 0) -> SVC:
        c = self.cfg
        return SVC(c.kernel_spec(self.kernel), c.C, c.tol, c.max_passes, c.max_iter)


@dataclass(frozen=True)
class GbtFactory:
    params: GbtParams

    def build(self, fold: int = 0) -> GBTClassifier:
        # per-fold seed keeps parallel folds deterministic
        return GBTClassifier(replace(self.params, seed=self.params.seed + fold))


@dataclass(frozen=True)
class PipelineConfig:
    bands: tuple = dsp.DEFAULT_BANDS
    broadband: dsp.BandSpec = dsp.BROADBAND
    sample_rate: float = 128.0
    filter_order: int = 5
    filter_mode: str = "zero_phase"
    epoch: EpochingPlan = EpochingPlan()
    welch: WelchConfig = WelchConfig()
    psd_source: str = "filtered"
    epsilon: float = 1e-8
    unit: str = "epoch"
    normalization: str = "global"
    k: int = 10
    fold_mode: str = "stratified"
    seed: int = 0
    model: str = "svm"
    svm: SvmConfig = SvmConfig()
    gbt: GbtParams = GbtParams()

    def __post_init__(self):
        checks = [
            (self.filter_mode in dsp.FILTER_MODES, f"filter_mode must be one of {dsp.FILTER_MODES}"),
            (self.psd_source in PSD_SOURCES, f"psd_source must be one of {PSD_SOURCES}"),
            (self.unit in UNITS, f"unit must be one of {UNITS}"),
            (self.normalization in NORM_SCOPES, f"normalization must be one of {NORM_SCOPES}"),
            (self.fold_mode in FOLD_MODES, f"fold_mode must be one of {FOLD_MODES}"),
            (self.model in MODELS, f"model must be one of {MODELS}"),
            (self.svm.kernel in KERNELS, f"svm.kernel must be one of {KERNELS}"),
            (all(k in KERNELS for k in self.svm.kernels), f"svm.kernels must be drawn from {KERNELS}"),
            (self.svm.C > 0, "svm.C must be > 0"),
            (self.welch.sample_rate == self.sample_rate, "welch sample rate must match sample_rate"),
            (self.welch.segment_len <= self.epoch.epoch_len_samples,
             "welch segment_len must not exceed the epoch length"),
            (self.epsilon >= 0, "epsilon must be >= 0"),
            (self.k >= 2, "k must be >= 2"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValidationError(f"config: {msg}")
        for band in (*self.bands, self.broadband):
            band.check(self.sample_rate)
        if len({b.name for b in self.bands}) != len(self.bands):
            raise ValidationError("config: band names must be unique")
        self.svm.kernel_spec()  # validates gamma/degree

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bands"] = {b.name: [b.f_low, b.f_high] for b in self.bands}
        d["broadband"] = [self.broadband.f_low, self.broadband.f_high]
        d["svm"]["kernels"] = list(self.svm.kernels)
        return d

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def classifier(self, kernel: str | None = None):
        if self.model == "gbt" and kernel is None:
            return GbtFactory(self.gbt)
        return SvmFactory(self.svm, kernel or self.svm.kernel)


def _sub(cls, section: dict, where: str, rename=None):
    rename = rename or {}
    names = {f.name for f in fields(cls)}
    kw = {}
    for key, val in section.items():
        name = rename.get(key, key)
        if name not in names:
            raise ValidationError(f"config: unknown key {where}.{key}")
        kw[name] = tuple(val) if isinstance(val, list) else val
    return kw


def from_dict(raw: dict) -> PipelineConfig:
    """Build a config from the nested TOML layout (see ``configs/default.toml``)."""
    raw = dict(raw)
    kw = {}
    try:
        if "bands" in raw:
            kw["bands"] = tuple(dsp.BandSpec(name, float(lo), float(hi))
                                for name, (lo, hi) in raw.pop("bands").items())
        pre = dict(raw.pop("preprocess", {}))
        if "broadband" in pre:
            lo, hi = pre.pop("broadband")
            kw["broadband"] = dsp.BandSpec("Broadband", float(lo), float(hi))
        kw.update(_sub(PipelineConfig, pre, "preprocess",
                       {"order": "filter_order", "mode": "filter_mode"}))
        if "epoch" in raw:
            kw["epoch"] = EpochingPlan(**_sub(EpochingPlan, raw.pop("epoch"), "epoch",
                                              {"length": "epoch_len_samples",
                                               "step": "step_samples"}))
        sr = float(kw.get("sample_rate", PipelineConfig.sample_rate))
        kw["welch"] = WelchConfig(sample_rate=sr, **_sub(
            WelchConfig, raw.pop("welch", {}), "welch", {"overlap": "segment_overlap"}))
        kw.update(_sub(PipelineConfig, raw.pop("features", {}), "features"))
        kw.update(_sub(PipelineConfig, raw.pop("cv", {}), "cv", {"mode": "fold_mode"}))
        kw.update(_sub(PipelineConfig, raw.pop("classifier", {}), "classifier"))
        if "svm" in raw:
            kw["svm"] = SvmConfig(**_sub(SvmConfig, raw.pop("svm"), "svm"))
        if "gbt" in raw:
            kw["gbt"] = GbtParams(**_sub(GbtParams, raw.pop("gbt"), "gbt"))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"config: {exc}") from None
    if raw:
        raise ValidationError(f"config: unknown sections {sorted(raw)}")
    return PipelineConfig(**kw)


def load(path=None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"missing config file {path}")
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"config {path}: {exc}") from None
    return from_dict(raw)


def override(cfg: PipelineConfig, **changes) -> PipelineConfig:
    """Apply flag overrides; ``None`` values are ignored."""
    changes = {k: v for k, v in changes.items() if v is not None}
    svm_changes = {k[4:]: changes.pop(k) for k in list(changes) if k.startswith("svm_")}
    if svm_changes:
        changes["svm"] = replace(cfg.svm, **svm_changes)
    gbt_seed = changes.pop("gbt_seed", None)
    if gbt_seed is not None:
        changes["gbt"] = replace(cfg.gbt, seed=gbt_seed)
    return replace(cfg, **changes) if changes else cfg


def from_resolved(d: dict) -> PipelineConfig:
    """Inverse of ``PipelineConfig.to_dict`` (used to replay a saved model's pipeline)."""
    d = dict(d)
    try:
        bands = tuple(dsp.BandSpec(n, lo, hi) for n, (lo, hi) in d.pop("bands").items())
        lo, hi = d.pop("broadband")
        svm = dict(d.pop("svm"))
        svm["kernels"] = tuple(svm["kernels"])
        return PipelineConfig(
            bands=bands, broadband=dsp.BandSpec("Broadband", lo, hi),
            epoch=EpochingPlan(**d.pop("epoch")), welch=WelchConfig(**d.pop("welch")),
            svm=SvmConfig(**svm), gbt=GbtParams(**d.pop("gbt")), **d)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"stored config is malformed: {exc}") from None
