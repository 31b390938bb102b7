from pathlib import Path

import pytest

from eegadhd import config as cfgmod
from eegadhd.config import GbtFactory, PipelineConfig, SvmFactory
from eegadhd.errors import ValidationError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_default_file_equals_builtin_defaults():
    assert cfgmod.load(CONFIGS / "default.toml") == PipelineConfig()
    assert cfgmod.load(CONFIGS / "default.toml").hash() == PipelineConfig().hash()


def test_rigorous_file():
    cfg = cfgmod.load(CONFIGS / "rigorous.toml")
    assert cfg.normalization == "fold" and cfg.fold_mode == "stratified_grouped"
    assert cfg.hash() != PipelineConfig().hash()


def test_resolved_round_trip():
    cfg = cfgmod.override(PipelineConfig(), model="gbt", svm_kernel="poly", gbt_seed=9, k=5)
    back = cfgmod.from_resolved(cfg.to_dict())
    assert back == cfg and back.hash() == cfg.hash()


def test_override_ignores_none():
    cfg = cfgmod.override(PipelineConfig(), k=None, svm_C=None)
    assert cfg is not None and cfg == PipelineConfig()
    assert cfgmod.override(PipelineConfig(), svm_C=2.0).svm.C == 2.0


def test_classifier_factories():
    assert isinstance(PipelineConfig().classifier(), SvmFactory)
    gbt = cfgmod.override(PipelineConfig(), model="gbt", gbt_seed=3).classifier()
    assert isinstance(gbt, GbtFactory)
    assert gbt.build(4).params.seed == 7
    assert PipelineConfig(model="gbt").classifier("linear").kernel == "linear"


@pytest.mark.parametrize("text, msg", [
    ("[cv]\nk = 1\n", "k must be"),
    ("[preprocess]\nmode = 'sideways'\n", "filter_mode"),
    ("[bands]\nGamma = [30.0, 70.0]\n", "Nyquist"),
    ("[welch]\nsegment_len = 4096\n", "segment_len"),
    ("[cv]\nfolds = 3\n", "unknown key cv.folds"),
    ("[extra]\nx = 1\n", "unknown sections"),
    ("[svm]\nkernel = 'cubic'\n", "svm.kernel"),
    ("not toml = = 1", "config"),
])
def test_invalid_configs(tmp_path, text, msg):
    p = tmp_path / "c.toml"
    p.write_text(text)
    with pytest.raises(ValidationError, match=msg):
        cfgmod.load(p)


def test_missing_file():
    with pytest.raises(ValidationError, match="missing config"):
        cfgmod.load("/nonexistent/c.toml")
