"""Versioned JSON model files: classifier, normalisation statistics and pipeline config."""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..errors import ValidationError
from ..features import NormalizationStats
from .gbt import GBTClassifier, GbtModel, GbtParams, Tree
from .svm import SVC, KernelSpec, SvmModel

FORMAT = "eegadhd-model"
VERSION = 1


def model_to_dict(est, stats: NormalizationStats, config: dict, config_hash: str) -> dict:
    out = {"format": FORMAT, "version": VERSION, "config": config, "config_hash": config_hash,
           "normalization": {"mu": stats.mu.tolist(), "sigma": stats.sigma.tolist()}}
    if isinstance(est, SVC):
        m = est.model_
        out["kind"] = "svm"
        out["svm"] = {"support_vectors": m.support_vectors.tolist(),
                      "dual_coeffs": m.dual_coeffs.tolist(), "bias": m.bias,
                      "kernel": asdict(m.kernel), "C": m.C}
    elif isinstance(est, GBTClassifier):
        m = est.model_
        out["kind"] = "gbt"
        out["gbt"] = {"params": asdict(m.params), "base_score": m.base_score,
                      "n_features": m.n_features, "trees": [t.to_dict() for t in m.trees]}
    else:
        raise ValidationError(f"cannot serialise {type(est).__name__}")
    return out


def model_from_dict(d: dict):
    """Inverse of ``model_to_dict``: returns ``(estimator, stats, config_dict, config_hash)``."""
    if d.get("format") != FORMAT:
        raise ValidationError("not a model file")
    if d.get("version") != VERSION:
        raise ValidationError(f"unsupported model file version {d.get('version')}")
    stats = NormalizationStats(np.asarray(d["normalization"]["mu"]),
                               np.asarray(d["normalization"]["sigma"]))
    if d["kind"] == "svm":
        s = d["svm"]
        kernel = KernelSpec(**s["kernel"])
        est = SVC(kernel, s["C"])
        est.model_ = SvmModel(np.asarray(s["support_vectors"], dtype=np.float64),
                              np.asarray(s["dual_coeffs"], dtype=np.float64),
                              float(s["bias"]), kernel, float(s["C"]))
    elif d["kind"] == "gbt":
        g = d["gbt"]
        params = GbtParams(**g["params"])
        est = GBTClassifier(params)
        est.model_ = GbtModel(params, float(g["base_score"]), int(g["n_features"]),
                              [Tree.from_dict(t) for t in g["trees"]])
    else:
        raise ValidationError(f"unknown model kind {d['kind']!r}")
    return est, stats, d["config"], d["config_hash"]


def save_model(path, est, stats, config: dict, config_hash: str) -> None:
    Path(path).write_text(json.dumps(model_to_dict(est, stats, config, config_hash)))


def load_model(path):
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"missing model file {path}")
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    return model_from_dict(d)
