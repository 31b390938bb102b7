"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

The filter, split-search and tree-predict kernels exist in both forms in one process and
are timed directly. The SMO helpers are compiled or not depending on
EEGADHD_DISABLE_JIT at import, so SMO and a full feature extraction are timed in two
child processes, one per setting.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from eegadhd import dsp
from eegadhd.model import gbt


def best_of(fn, repeat):
    fn()  # warm-up (compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def in_process(repeat):
    rng = np.random.default_rng(0)
    sos = dsp.design_bandpass(5, dsp.DEFAULT_BANDS[2], 128.0).sos
    x = rng.standard_normal((7680, 19))
    zi = np.zeros((len(sos), 2, 19))

    X = rng.standard_normal((3000, 190))
    sorted_idx = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable"))
    slot = rng.integers(-1, 8, 3000)
    g, h = rng.standard_normal(3000), rng.uniform(0.05, 0.25, 3000)
    live = slot >= 0
    G = np.bincount(slot[live], weights=g[live], minlength=8)
    H = np.bincount(slot[live], weights=h[live], minlength=8)
    feats = np.arange(152)
    split_args = (X, sorted_idx, slot, g, h, G, H, feats, 1.0)

    y = (X[:, 0] + X[:, 1] > 0).astype(int)
    tree = gbt.gbt_fit(X[:, :20], y, gbt.GbtParams(n_trees=1, max_depth=6)).trees[0]
    pred_args = (tree.feature, tree.threshold, tree.left, tree.right, tree.value,
                 np.ascontiguousarray(X[:, :20]))

    cases = {
        "sosfilt 7680x19": (lambda: dsp.sosfilt_jit(sos, x, zi.copy()),
                            lambda: dsp.sosfilt_numpy(sos, x, zi.copy())),
        "split search 3000x152": (lambda: gbt.best_splits_jit(*split_args),
                                  lambda: gbt._best_splits_numpy(*split_args)),
        "tree predict 3000 rows": (lambda: gbt.tree_predict_jit(*pred_args),
                                   lambda: gbt._tree_predict_numpy(*pred_args)),
    }
    return {name: (best_of(j, repeat), best_of(n, repeat)) for name, (j, n) in cases.items()}


CHILD = """
import json, sys, time
import numpy as np
from eegadhd import pipeline, synth
from eegadhd.config import PipelineConfig
from eegadhd.model.svm import KernelSpec, kernel_matrix, smo_solve
repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
X = rng.standard_normal((600, 190)); y = np.where(X[:, :3].sum(1) + rng.standard_normal(600) > 0, 1.0, -1.0)
K = kernel_matrix(KernelSpec("rbf").resolve(X), X)
recs = synth.generate(synth.SynthSpec(n_per_class=2, n_samples=3840))
def best(fn):
    fn(); out = []
    for _ in range(repeat):
        t0 = time.perf_counter(); fn(); out.append(time.perf_counter() - t0)
    return min(out)
print(json.dumps({"SMO rbf 600 points": best(lambda: smo_solve(K, y, 1.0)),
                  "extract 4 subjects": best(lambda: pipeline.extract_features(recs, PipelineConfig()))}))
"""


def across_flag(repeat):
    res = {}
    for disable in ("0", "1"):
        env = {**os.environ, "EEGADHD_DISABLE_JIT": disable}
        out = subprocess.run([sys.executable, "-c", CHILD, str(repeat)], env=env, check=True,
                             capture_output=True, text=True)
        res[disable] = json.loads(out.stdout)
    return {k: (res["0"][k], res["1"][k]) for k in res["0"]}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args()
    rows = {**in_process(args.repeat), **across_flag(args.repeat)}
    print(f"{'kernel':<26}{'numba (ms)':>12}{'numpy (ms)':>12}{'speed-up':>10}")
    for name, (j, n) in rows.items():
        print(f"{name:<26}{1e3 * j:>12.2f}{1e3 * n:>12.2f}{n / j:>9.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({k: {"numba_s": j, "numpy_s": n} for k, (j, n) in rows.items()}, fh, indent=2)


if __name__ == "__main__":
    main()
