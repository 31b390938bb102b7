"""The numba kernels and their numpy fallbacks must agree."""

import json
import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from eegadhd import _accel, dsp
from eegadhd.model import gbt

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


@needs_numba
def test_sosfilt_paths_agree(rng):
    sos = dsp.design_bandpass(5, dsp.DEFAULT_BANDS[2], 128.0).sos
    x = rng.standard_normal((3000, 4))
    zi = rng.standard_normal((len(sos), 2, 4))
    za, zb = zi.copy(), zi.copy()  # both paths update the state in place
    np.testing.assert_allclose(dsp.sosfilt_jit(sos, x, za), dsp.sosfilt_numpy(sos, x, zb),
                               rtol=1e-10, atol=1e-13)
    np.testing.assert_allclose(za, zb, rtol=1e-10, atol=1e-13)


def _level(rng, n=300, d=6):
    X = np.round(rng.standard_normal((n, d)), 1)  # plenty of ties
    sorted_idx = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable"))
    slot = rng.integers(-1, 4, n)
    g, h = rng.standard_normal(n), rng.uniform(0.05, 0.25, n)
    G = np.bincount(slot[slot >= 0], weights=g[slot >= 0], minlength=4)
    H = np.bincount(slot[slot >= 0], weights=h[slot >= 0], minlength=4)
    return X, sorted_idx, slot, g, h, G, H, np.array([0, 2, 3, 5]), 1.0


@needs_numba
@pytest.mark.parametrize("seed", range(5))
def test_split_search_paths_agree(seed):
    args = _level(np.random.default_rng(seed))
    a = gbt.best_splits_jit(*args)
    b = gbt._best_splits_numpy(*args)
    np.testing.assert_array_equal(a[1], b[1])
    np.testing.assert_array_equal(a[2], b[2])
    np.testing.assert_allclose(a[0], b[0], rtol=1e-12)


@needs_numba
def test_tree_predict_paths_agree(rng):
    X = rng.standard_normal((400, 6))
    y = (X[:, 0] * X[:, 1] > 0).astype(int)
    t = gbt.gbt_fit(X, y, gbt.GbtParams(n_trees=1, max_depth=5, subsample=1, colsample=1)).trees[0]
    arrays = (t.feature, t.threshold, t.left, t.right, t.value, X)
    np.testing.assert_array_equal(gbt.tree_predict_jit(*arrays), gbt._tree_predict_numpy(*arrays))


SCRIPT = textwrap.dedent("""
    import json, numpy as np
    from eegadhd import _accel
    from eegadhd.model.svm import KernelSpec, svm_fit
    from eegadhd.model.gbt import GbtParams, gbt_fit
    from eegadhd import dsp
    rng = np.random.default_rng(0)
    X = rng.standard_normal((60, 5)); y = np.where(X[:, 0] + 0.3 * rng.standard_normal(60) > 0, 1.0, -1.0)
    m = svm_fit(X, y, KernelSpec("rbf"))
    g = gbt_fit(X, (y > 0).astype(int), GbtParams(n_trees=10))
    f = dsp.apply_filter(dsp.design_bandpass(5, dsp.BROADBAND, 128.0), X[:, :2].repeat(10, 0))
    print(json.dumps({"jit": _accel.JIT_ENABLED, "svm": m.decision_function(X).tolist(),
                      "gbt": g.margin(X).tolist(), "filt": f[::7].ravel().tolist()}))
""")


def _run(disable):
    env = {**os.environ, "EEGADHD_DISABLE_JIT": "1" if disable else "0"}
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True,
                         text=True, check=True)
    return json.loads(out.stdout)


@needs_numba
def test_whole_models_agree_across_the_flag():
    fast, slow = _run(False), _run(True)
    assert fast["jit"] and not slow["jit"]
    for key in ("svm", "gbt", "filt"):
        np.testing.assert_allclose(fast[key], slow[key], rtol=1e-8, atol=1e-10)
