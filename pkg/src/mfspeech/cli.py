"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 input/IO error, 3 degenerate analysis.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .audio_io import Corpus, TimeSeries, detect_corpus, encode_wav_float32, normalize_peak, read_wav, scan_corpus
from .classifier import SvmModel, cross_validate, evaluate, svm_predict_many, svm_train
from .config import AnalysisConfig, load_config_file
from .errors import AnalysisError, InputError, MfspeechError
from .features import FeatureVector, extract_features, load_features, write_features_csv
from .mfdfa import mfdfa_analyze
from .synth import CascadeSpec, binomial_cascade, fgn, white_noise
from .wtmm import wtmm_analyze

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_ANALYSIS = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# helpers

def _write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _read_signal(path) -> TimeSeries:
    """WAV by extension, otherwise a one-value-per-line CSV (``#`` comments ok)."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".wav":
            return read_wav(path)
        values = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                try:
                    values.append(float(line.split(",")[0]))
                except ValueError:
                    raise InputError(f"{path}:{lineno}: not a number: {line!r}") from None
        return TimeSeries(np.array(values), 1.0)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _signal_csv(x: TimeSeries):
    return "".join(f"{v!r}\n" for v in x.samples.tolist())


def _result_csv(res):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    out.write(f"# mfspeech-analysis v{SCHEMA_VERSION} method={res.method}\n")
    surface_name = "F_q(s)" if res.method == "mfdfa" else "Z(q,s)"
    out.write(f"# section: surface {surface_name}\n")
    w.writerow(["q"] + [f"s={int(s)}" for s in res.scales])
    for q, row in zip(res.qs, res.surface):
        w.writerow([repr(float(q))] + [repr(float(v)) for v in row])
    out.write("# section: exponents\n")
    if res.hurst is not None:
        w.writerow(["q", "h", "tau", "r2"])
        for q, h, t, r in zip(res.qs, res.hurst.h, res.tau.tau, res.tau.r2):
            w.writerow([repr(float(q)), repr(float(h)), repr(float(t)), repr(float(r))])
    else:
        w.writerow(["q", "tau", "r2"])
        for q, t, r in zip(res.qs, res.tau.tau, res.tau.r2):
            w.writerow([repr(float(q)), repr(float(t)), repr(float(r))])
    out.write("# section: spectrum\n")
    sp = res.spectrum
    w.writerow(["q", "tau", "alpha", "f_alpha", "pruned"])
    for q, t, a, f, p in zip(sp.qs, sp.tau, sp.alpha, sp.f, sp.pruned):
        w.writerow([repr(float(q)), repr(float(t)), repr(float(a)), repr(float(f)), str(bool(p)).lower()])
    return out.getvalue()


def _result_json(res, cfg, source):
    meta = {k: v for k, v in res.metadata.items()}
    return _dumps({
        "schema_version": SCHEMA_VERSION,
        "method": res.method,
        "source": source,
        "fit": res.fit.to_dict(),
        "n_pruned": res.spectrum.n_pruned,
        "metadata": meta,
        "config": cfg.to_dict(),
    })


def _build_config(args):
    cfg = AnalysisConfig()
    if getattr(args, "config", None):
        cfg = load_config_file(args.config, cfg)
    overrides = {}
    for key in (
        "method", "detrend_order", "wavelet_order", "svm_c", "seed", "workers",
        "mfdfa_scale_min", "mfdfa_scale_max", "mfdfa_n_scales", "mfdfa_spacing",
        "mfdfa_q_min", "mfdfa_q_max", "mfdfa_q_step",
        "wtmm_scale_min", "wtmm_scale_max", "wtmm_n_scales", "wtmm_spacing",
        "wtmm_q_min", "wtmm_q_max", "wtmm_q_step", "wtmm_boundary", "wtmm_engine",
    ):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "bidirectional", False):
        overrides["bidirectional"] = True
    return cfg.replace(**overrides) if overrides else cfg


# ---------------------------------------------------------------------------
# commands

def cmd_synth(args):
    cfg = _build_config(args)
    seed = cfg.seed if args.seed is None else args.seed
    if args.kind == "cascade":
        x = binomial_cascade(CascadeSpec(args.a, args.levels))
    elif args.kind == "noise":
        x = white_noise(args.n, seed)
    else:
        x = fgn(args.n, args.hurst, seed)
    out = Path(args.out)
    if out.suffix.lower() == ".wav":
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(encode_wav_float32(x, 16000))
    else:
        _write_text(out, _signal_csv(x))
    print(f"wrote {len(x)} samples to {out}", file=sys.stderr)
    return EXIT_OK


def _analyze_one(x, cfg, method):
    return mfdfa_analyze(x, cfg) if method == "mfdfa" else wtmm_analyze(x, cfg)


def cmd_analyze(args):
    cfg = _build_config(args)
    x = normalize_peak(_read_signal(args.input))
    out_dir = Path(args.out_dir or cfg.output_dir)
    stem = Path(args.input).stem
    methods = ("mfdfa", "wtmm") if cfg.method == "both" else (cfg.method,)
    results = [(m, _analyze_one(x, cfg, m)) for m in methods]
    for method, res in results:
        _write_text(out_dir / f"{stem}.{method}.csv", _result_csv(res))
        _write_text(out_dir / f"{stem}.{method}.fit.json", _result_json(res, cfg, Path(args.input).name))
        fit = res.fit
        print(f"{method}: alpha0={fit.alpha0:.4f} width={fit.width:.4f}", file=sys.stderr)
    return EXIT_OK


def _feature_job(job):
    path, rel, label, cfg = job
    try:
        x = normalize_peak(read_wav(path))
        return extract_features(x, cfg, label=label, path=rel), None
    except MfspeechError as exc:
        return None, f"{rel}: {type(exc).__name__}: {exc}"


def cmd_features(args):
    cfg = _build_config(args)
    root = Path(args.corpus)
    entries = scan_corpus(root, Corpus(args.convention))
    jobs = [(e.path, e.path.relative_to(root).as_posix(), e.label, cfg) for e in entries]
    workers = cfg.workers or os.cpu_count() or 1
    if workers == 1 or len(jobs) < 2:
        results = [_feature_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_feature_job, jobs))
    rows, skipped = [], 0
    for fv, err in results:
        if fv is None:
            skipped += 1
            print(f"warning: skipped {err}", file=sys.stderr)
        else:
            rows.append(fv)
    _write_text(args.out, write_features_csv(rows))
    print(f"features: {len(rows)} rows written, {skipped} skipped", file=sys.stderr)
    return EXIT_OK


def _labelled(rows):
    bad = [r.path for r in rows if r.label is None]
    if bad:
        raise InputError(f"{len(bad)} feature row(s) have no label, e.g. {bad[0]!r}")
    return rows


def cmd_train(args):
    cfg = _build_config(args)
    rows = _labelled(load_features(args.features))
    model = svm_train(rows, cfg.svm_c)
    _write_text(args.out, model.to_json())
    print(f"trained on {len(rows)} vectors, classes {[c.value for c in model.classes]}", file=sys.stderr)
    return EXIT_OK


def _load_model(path):
    try:
        return SvmModel.from_json(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read model {path}: {exc}") from exc


def cmd_predict(args):
    cfg = _build_config(args)
    model = _load_model(args.model)
    if args.features:
        rows = load_features(args.features)
    else:
        rows = [
            extract_features(normalize_peak(_read_signal(p)), cfg, path=Path(p).as_posix())
            for p in args.inputs
        ]
    if not rows:
        raise InputError("nothing to predict")
    preds = svm_predict_many(model, np.array([r.as_array() for r in rows]))
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["path", "predicted"])
    for r, p in zip(rows, preds):
        w.writerow([r.path or "", p.value])
    text = f"# mfspeech-predictions v{SCHEMA_VERSION}\n" + out.getvalue()
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cv_report(rows, cfg, runs, test_per_class):
    cv = cross_validate(rows, runs, test_per_class, cfg.seed, cfg.svm_c)
    return cv.to_dict(), cv


def cmd_evaluate(args):
    cfg = _build_config(args)
    rows = _labelled(load_features(args.features))
    report = {"schema_version": SCHEMA_VERSION, "config": cfg.to_dict()}
    lines = []
    if args.model:
        cm = evaluate(_load_model(args.model), rows)
        report["mode"] = "model"
        report["confusion"] = cm.to_dict()
        lines.append(cm.table())
    else:
        report["mode"] = "cross_validation"
        report["runs"] = args.runs
        report["test_per_class"] = args.test_per_class
        summary, cv = _cv_report(rows, cfg, args.runs, args.test_per_class)
        report["pooled"] = summary
        lines.append(f"pooled: mean accuracy {cv.mean:.4f}, std {cv.std:.4f} over {args.runs} runs")
        for k, m in enumerate(cv.matrices, 1):
            lines.append(f"run {k}:")
            lines.append(m.table())
        if args.per_corpus:
            per = {}
            for corpus in Corpus:
                sub = [r for r in rows if detect_corpus(r.path or "") == corpus]
                if not sub:
                    continue
                try:
                    per[corpus.value], cvc = _cv_report(sub, cfg, args.runs, args.test_per_class)
                    lines.append(f"{corpus.value}: mean accuracy {cvc.mean:.4f}, std {cvc.std:.4f}")
                except InputError as exc:
                    per[corpus.value] = {"error": str(exc)}
                    lines.append(f"{corpus.value}: not evaluated ({exc})")
            report["per_corpus"] = per
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_text(args.out, _dumps(report))
        _write_text(Path(args.out).with_suffix(".txt"), text)
    sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _add_analysis_flags(p):
    g = p.add_argument_group("analysis")
    g.add_argument("--method", choices=("mfdfa", "wtmm", "both"))
    g.add_argument("--detrend-order", dest="detrend_order", type=int)
    g.add_argument("--bidirectional", action="store_true", help="also use segments from the end")
    g.add_argument("--wavelet-order", dest="wavelet_order", type=int)
    for pre in ("mfdfa", "wtmm"):
        g.add_argument(f"--{pre}-scale-min", dest=f"{pre}_scale_min", type=int)
        g.add_argument(f"--{pre}-scale-max", dest=f"{pre}_scale_max", type=int)
        g.add_argument(f"--{pre}-n-scales", dest=f"{pre}_n_scales", type=int)
        g.add_argument(f"--{pre}-spacing", dest=f"{pre}_spacing", choices=("log", "dyadic"))
        g.add_argument(f"--{pre}-q-min", dest=f"{pre}_q_min", type=float)
        g.add_argument(f"--{pre}-q-max", dest=f"{pre}_q_max", type=float)
        g.add_argument(f"--{pre}-q-step", dest=f"{pre}_q_step", type=float)
    g.add_argument("--wtmm-boundary", dest="wtmm_boundary", choices=("periodic", "valid"))
    g.add_argument("--wtmm-engine", dest="wtmm_engine", choices=("fft", "direct"))


def build_parser():
    parser = _Parser(prog="mfspeech", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mfspeech {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value (or JSON) configuration file")
    common.add_argument("--seed", type=int)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("synth", parents=[common], help="generate test signals")
    p.add_argument("kind", choices=("cascade", "noise", "fgn"))
    p.add_argument("--a", type=float, default=0.75)
    p.add_argument("--levels", type=int, default=16)
    p.add_argument("--n", type=int, default=65536)
    p.add_argument("--hurst", type=float, default=0.7)
    p.add_argument("--out", required=True, help=".csv or .wav (32-bit float, 16 kHz)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("analyze", parents=[common], help="MFDFA / WTMM spectra of one signal")
    p.add_argument("input", help="WAV file or one-value-per-line CSV")
    p.add_argument("--out-dir", dest="out_dir")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("features", parents=[common], help="(S, alpha1, alpha2) for a corpus")
    p.add_argument("corpus")
    p.add_argument("--convention", required=True, choices=[c.value for c in Corpus])
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int)
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", parents=[common], help="train the one-vs-one linear SVM")
    p.add_argument("features")
    p.add_argument("--C", dest="svm_c", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="classify clips or feature rows")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--model", required=True)
    p.add_argument("--features")
    p.add_argument("--out")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", parents=[common], help="confusion matrices and cross-validation")
    p.add_argument("features")
    p.add_argument("--model", help="evaluate this model instead of cross-validating")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--test-per-class", dest="test_per_class", type=int, default=12)
    p.add_argument("--C", dest="svm_c", type=float)
    p.add_argument("--per-corpus", dest="per_corpus", action="store_true")
    p.add_argument("--out", help="JSON report path; a .txt table is written next to it")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "predict" and not args.inputs and not args.features:
            raise UsageError("mfspeech predict: give input files or --features")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AnalysisError as exc:
        print(f"analysis error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except InputError as exc:
        print(f"input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
