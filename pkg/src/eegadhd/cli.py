"""Command-line entry point.

Exit status: 0 ok, 1 validation error (bad input, config or usage), 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import eval as ev
from . import pipeline, synth
from .errors import EEGError, ValidationError
from .features import FeatureMatrix, fit_normalizer, transform
from .ingest import Recording, load_manifest, read_subject_csv, write_manifest
from .model.io import load_model, save_model

GROUPED_NOTE = ("epoch-level folds without subject grouping let epochs of one subject sit in "
                "both train and test folds; accuracies are optimistic")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _pipeline_flags(p):
    g = p.add_argument_group("pipeline overrides (take precedence over --config)")
    g.add_argument("--config", help="TOML pipeline config")
    g.add_argument("--filter-mode", choices=("causal", "zero_phase"))
    g.add_argument("--psd-source", choices=("filtered", "broadband"))
    g.add_argument("--normalization", choices=ev.NORM_SCOPES)
    g.add_argument("--unit", choices=cfgmod.UNITS)
    g.add_argument("--fold-mode", choices=ev.FOLD_MODES)
    g.add_argument("--k", type=int)
    g.add_argument("--seed", type=int, help="fold assignment seed")
    g.add_argument("--gbt-seed", type=int)
    g.add_argument("--model", choices=cfgmod.MODELS)
    g.add_argument("--kernel", dest="svm_kernel", choices=("linear", "rbf", "poly", "sigmoid"))
    g.add_argument("--C", dest="svm_C", type=float)
    g.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default: available cores)")


def _resolve(args) -> cfgmod.PipelineConfig:
    cfg = cfgmod.load(args.config)
    names = ("filter_mode", "psd_source", "normalization", "unit", "fold_mode", "k", "seed",
             "gbt_seed", "model", "svm_kernel", "svm_C")
    return cfgmod.override(cfg, **{n: getattr(args, n, None) for n in names})


def _jobs(args) -> int:
    return args.jobs if args.jobs else pipeline.default_jobs()


def _echo_config(cfg):
    print(f"# resolved config (hash {cfg.hash()})", file=sys.stderr)
    print(json.dumps(cfg.to_dict(), sort_keys=True), file=sys.stderr)


def _load_features(args, cfg) -> FeatureMatrix:
    if bool(args.features) == bool(args.manifest):
        raise ValidationError("give exactly one of --features or --manifest")
    if args.features:
        return FeatureMatrix.from_csv(args.features)
    recs = load_manifest(args.manifest, cfg.sample_rate)
    return pipeline.extract_features(recs, cfg, _jobs(args))


def _unit(fm: FeatureMatrix, cfg) -> FeatureMatrix:
    return fm.by_subject() if cfg.unit == "subject" else fm


def _write_report(out_dir, stem, payload, text, csv_rows):
    if out_dir is None:
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.json").write_text(ev.dumps(payload))
    (out / f"{stem}.txt").write_text(text + "\n")
    with (out / f"{stem}.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        for row in csv_rows:
            w.writerow(row)


def _header(cfg, fm) -> dict:
    head = {
        "config": cfg.to_dict(),
        "config_hash": cfg.hash(),
        "normalization": cfg.normalization,
        "fold_mode": cfg.fold_mode,
        "unit": cfg.unit,
        "n_samples": len(fm),
        "n_subjects": len(set(fm.subject_ids)),
        "std_convention": "population (divide by k)",
    }
    if cfg.fold_mode == "stratified" and cfg.unit == "epoch":
        head["warning"] = GROUPED_NOTE
    return head


def cmd_synth(args) -> int:
    spec = synth.SynthSpec(n_per_class=args.n_per_class,
                           n_samples=int(round(args.seconds * 128.0)), seed=args.seed)
    spec.profiles["ADHD"]["Theta"] = spec.profiles["Control"]["Theta"] * args.theta_ratio
    recs = synth.generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out / "manifest.csv", recs)
    print(f"wrote {len(recs)} subjects to {out / 'manifest.csv'}")
    return 0


def cmd_extract(args) -> int:
    cfg = _resolve(args)
    _echo_config(cfg)
    recs = load_manifest(args.manifest, cfg.sample_rate)
    fm = pipeline.extract_features(recs, cfg, _jobs(args))
    fm.to_csv(args.out)
    meta = {"config": cfg.to_dict(), "config_hash": cfg.hash(), "manifest": str(args.manifest)}
    Path(str(args.out) + ".meta.json").write_text(ev.dumps(meta))
    print(f"wrote {len(fm)} rows x {fm.X.shape[1]} features to {args.out}")
    return 0


def _fold_csv(rep):
    rows = [["fold", "n", "accuracy", "precision", "recall", "f1", "tp", "fp", "fn", "tn"]]
    rows += [[r[k] for k in rows[0]] for r in rep.per_fold]
    rows.append(["pooled", rep.tp + rep.fp + rep.fn + rep.tn, rep.mean_accuracy, rep.precision,
                 rep.recall, rep.f1, rep.tp, rep.fp, rep.fn, rep.tn])
    return rows


def cmd_crossval(args) -> int:
    cfg = _resolve(args)
    _echo_config(cfg)
    fm = _unit(_load_features(args, cfg), cfg)
    plan = ev.make_folds(fm.y, fm.subject_ids, cfg.k, cfg.fold_mode, cfg.seed)
    rep = ev.cross_validate(fm.X, fm.y, fm.subject_ids, cfg.classifier(), plan,
                            cfg.normalization, _jobs(args))
    name = f"SVM({cfg.svm.kernel})" if cfg.model == "svm" else "GBT"
    payload = {**_header(cfg, fm), "model": name, "metrics": rep.to_dict()}
    text = "\n\n".join([ev.format_model_table([(name, rep)]),
                        f"std of fold accuracy: {rep.std_accuracy:.4f}",
                        ev.format_fold_table(rep),
                        f"normalization={cfg.normalization} fold_mode={cfg.fold_mode} "
                        f"unit={cfg.unit} config_hash={cfg.hash()}"])
    if "warning" in payload:
        text += f"\nWARNING: {payload['warning']}"
    print(text)
    _write_report(args.out_dir, "crossval", payload, text, _fold_csv(rep))
    return 0


def cmd_compare_kernels(args) -> int:
    cfg = _resolve(args)
    _echo_config(cfg)
    fm = _unit(_load_features(args, cfg), cfg)
    plan = ev.make_folds(fm.y, fm.subject_ids, cfg.k, cfg.fold_mode, cfg.seed)
    rows = ev.compare_kernels(fm.X, fm.y, fm.subject_ids, cfg.svm.kernels, cfg.classifier,
                              plan, cfg.normalization, _jobs(args))
    payload = {**_header(cfg, fm), "kernels": [
        {"kernel": k, "mean_accuracy": r.mean_accuracy, "std_accuracy": r.std_accuracy,
         "metrics": r.to_dict()} for k, r in rows]}
    text = ev.format_kernel_table(rows)
    if "warning" in payload:
        text += f"\nWARNING: {payload['warning']}"
    print(text)
    csv_rows = [["kernel", "mean_accuracy", "std_accuracy", *[f"fold{i}" for i in range(cfg.k)]]]
    csv_rows += [[k, r.mean_accuracy, r.std_accuracy, *r.fold_accuracy] for k, r in rows]
    _write_report(args.out_dir, "kernels", payload, text, csv_rows)
    return 0


def cmd_train(args) -> int:
    cfg = _resolve(args)
    _echo_config(cfg)
    fm = _unit(_load_features(args, cfg), cfg)
    stats = fit_normalizer(fm.X)
    est = cfg.classifier().build(0).fit(transform(fm.X, stats), fm.y)
    save_model(args.out, est, stats, cfg.to_dict(), cfg.hash())
    print(f"wrote {cfg.model} model trained on {len(fm)} rows to {args.out}")
    return 0


def cmd_predict(args) -> int:
    est, stats, cfg_dict, cfg_hash = load_model(args.model)
    cfg = cfgmod.from_resolved(cfg_dict)
    samples = read_subject_csv(args.subject)
    sid = Path(args.subject).stem
    rec = Recording(sid, "Control", samples, cfg.sample_rate)  # label unused
    X = pipeline.epoch_features(rec.samples, cfg)
    if cfg.unit == "subject":
        X = X.mean(axis=0, keepdims=True)
    pred = np.asarray(est.predict(transform(X, stats)))
    n_pos = int(pred.sum())
    # ties go to the positive class, as with a zero SVM score
    verdict = "ADHD" if 2 * n_pos >= len(pred) else "Control"
    out = {"subject": sid, "config_hash": cfg_hash, "n_epochs": len(pred),
           "epoch_labels": ["ADHD" if p else "Control" for p in pred],
           "adhd_votes": n_pos, "label": verdict}
    for i, lab in enumerate(out["epoch_labels"]):
        print(f"epoch {i:4d}  {lab}")
    print(f"subject {sid}: {verdict} ({n_pos}/{len(pred)} epochs ADHD)")
    if args.out:
        Path(args.out).write_text(ev.dumps(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eegadhd", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="write a seeded synthetic dataset (manifest + subject CSVs)")
    s.add_argument("--out", required=True)
    s.add_argument("--n-per-class", type=int, default=20)
    s.add_argument("--seconds", type=float, default=60.0)
    s.add_argument("--theta-ratio", type=float, default=1.5,
                   help="ADHD theta RMS relative to control")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("extract", help="manifest -> features CSV")
    s.add_argument("--manifest", required=True)
    s.add_argument("--out", required=True)
    _pipeline_flags(s)
    s.set_defaults(func=cmd_extract)

    for name, func, helptext in (
            ("crossval", cmd_crossval, "k-fold cross-validation of the configured model"),
            ("compare-kernels", cmd_compare_kernels, "cross-validate every configured SVM kernel"),
            ("train", cmd_train, "fit the configured model on all rows and save it")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--features")
        s.add_argument("--manifest")
        if name == "train":
            s.add_argument("--out", required=True)
        else:
            s.add_argument("--out-dir", help="write <name>.json/.csv/.txt here")
        _pipeline_flags(s)
        s.set_defaults(func=func)

    s = sub.add_parser("predict", help="classify one subject CSV with a saved model")
    s.add_argument("--model", required=True)
    s.add_argument("--subject", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_predict)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (EEGError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
