"""Command-line interface: simulate | extract | train | eval | detect | roc.

Exit codes: 0 success, 2 usage error, 3 input error (missing or
unparsable file, invalid parameter), 4 degenerate data.
"""

import argparse
import dataclasses
import sys

from . import __version__
from .datagen import gen_corpus
from .errors import DegenerateDataError, SwdError
from .evaluation import roc
from .io import (
    RunConfig,
    read_config,
    read_corpus,
    read_features,
    read_model,
    write_corpus,
    write_detections,
    write_eval_report,
    write_features,
    write_model,
    write_roc_csv,
    write_train_report,
)
from .ann import predict_scores
from .signal_core import FilterConfig, MaConfig
from . import pipeline

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_DEGENERATE = 0, 2, 3, 4


def _load_config(args):
    cfg = read_config(args.config) if getattr(args, "config", None) else RunConfig()
    ma = cfg.ma
    if getattr(args, "ma_h1", None) is not None or getattr(args, "ma_h2", None) is not None:
        ma = MaConfig(
            args.ma_h1 if args.ma_h1 is not None else ma.h1,
            args.ma_h2 if args.ma_h2 is not None else ma.h2,
        )
    train = cfg.train
    overrides = {}
    for flag, name in (("seed", "seed"), ("epochs", "max_epochs"), ("lr", "learning_rate"), ("hidden", "n_hidden")):
        if getattr(args, flag, None) is not None:
            overrides[name] = getattr(args, flag)
    if overrides:
        train = dataclasses.replace(train, **overrides)
    gen = cfg.gen
    gen_over = {}
    if getattr(args, "gen_seed", None) is not None:
        gen_over["seed"] = args.gen_seed
    if getattr(args, "n_per_class", None) is not None:
        gen_over["n_per_class"] = args.n_per_class
    if gen_over:
        gen = dataclasses.replace(gen, **gen_over)
    return dataclasses.replace(cfg, ma=ma, train=train, gen=gen)


def _features_to_config(cfg, meta):
    """The MA/filter settings recorded in a features file override the config."""
    ma = MaConfig(**meta["ma"]) if "ma" in meta else cfg.ma
    flt = FilterConfig(**meta["filter"]) if "filter" in meta else cfg.filter
    return dataclasses.replace(cfg, ma=ma, filter=flt)


def cmd_simulate(args, argv):
    cfg = _load_config(args)
    signals = gen_corpus(cfg.gen)
    write_corpus(signals, args.out, source={"generator": dataclasses.asdict(cfg.gen)}, config=cfg, flags=argv)
    n_swd = sum(s.label == "SWD" for s in signals)
    print(f"simulated {len(signals)} signals ({n_swd} SWD / {len(signals) - n_swd} nSWD) "
          f"at {cfg.gen.fs:g} Hz, {cfg.gen.duration_s:g} s -> {args.out}")


def cmd_extract(args, argv):
    cfg = _load_config(args)
    signals, _ = read_corpus(args.corpus)
    post, pre = pipeline.corpus_features(signals, cfg, args.window_s, args.hop_s)
    write_features(post, args.out, raw=pre, config=cfg, flags=argv)
    print(f"extracted {len(post)} feature vectors (h1={cfg.ma.h1}, h2={cfg.ma.h2}) -> {args.out}")


def cmd_train(args, argv):
    cfg = _load_config(args)
    if args.features:
        fs = read_features(args.features)
        cfg = _features_to_config(cfg, fs.meta)
        feats = fs.post
    else:
        signals, _ = read_corpus(args.corpus)
        feats, _ = pipeline.corpus_features(signals, cfg)
    model, report = pipeline.fit(feats, cfg, flags=argv)
    write_model(model, args.model_out)
    if args.report_out:
        write_train_report(report, args.report_out, config=cfg, flags=argv)
    best = report.epochs[report.best_epoch]
    print(f"trained {cfg.train.n_hidden}-hidden network on {len(report.split_ids['train'])} examples; "
          f"stop={report.stop_reason} after epoch {report.epochs[-1].epoch}, best epoch {report.best_epoch}")
    print(f"  loss train={best.train_loss:.4f} val={best.val_loss:.4f} test={best.test_loss:.4f}")
    print(f"  model -> {args.model_out}" + (f", report -> {args.report_out}" if args.report_out else ""))


def _model_features(args, model):
    if args.features:
        fs = read_features(args.features)
        return fs.post, fs.pre
    signals, _ = read_corpus(args.corpus)
    return pipeline.corpus_features(signals, model.config)


def _pct(x):
    return "   n/a" if x is None else f"{100 * x:6.2f}"


def cmd_eval(args, argv):
    model = read_model(args.model)
    post, pre = _model_features(args, model)
    report = pipeline.evaluate(model, post, args.split, args.threshold, pre=pre, n_bins=args.bins)
    write_eval_report(report, args.out, config=model.config, flags=argv)
    print(f"{'split':>6} {'n':>5} {'TPR':>6} {'TNR':>6} {'FNR':>6} {'FPR':>6} {'Misc':>6} "
          f"{'Pr':>6} {'Pv':>6} {'ACC':>6} {'AUC':>7}")
    for name, block in report["splits"].items():
        m = block["metrics"]
        auc = "    n/a" if block["auc"] is None else f"{block['auc']:7.4f}"
        print(f"{name:>6} {block['n']:5d} {_pct(m['tpr'])} {_pct(m['tnr'])} {_pct(m['fnr'])} {_pct(m['fpr'])} "
              f"{_pct(m['misclassification'])} {_pct(m['precision'])} {_pct(m['prevalence'])} "
              f"{_pct(m['accuracy'])} {auc}")
    for stage in ("features_before_ma", "features_after_ma"):
        if stage in report:
            es = report[stage]
            print(f"{stage}: d(mu)={es['effect_size_mu']['cohens_d']:.4f} "
                  f"d(sigma)={es['effect_size_sigma']['cohens_d']:.4f}")
    print(f"report -> {args.out}")


def cmd_detect(args, argv):
    model = read_model(args.model)
    signals, _ = read_corpus(args.corpus)
    rows, stats = pipeline.detect(model, signals, args.window_s, args.hop_s, args.threshold)
    meta = {"threshold": args.threshold, "window_s": args.window_s,
            "hop_s": args.hop_s if args.hop_s is not None else args.window_s,
            "config_digest": model.config.digest(), "flags": list(argv)}
    write_detections(rows, args.out, meta)
    n_swd = sum(r[4] == "SWD" for r in rows)
    print(f"scored {stats['windows']} windows from {len(signals)} signals: {n_swd} SWD -> {args.out}")
    if args.bench:
        print(f"bench: {stats['signal_seconds']:.1f} s of signal in {stats['elapsed_seconds']:.3f} s "
              f"({stats['realtime_factor']:.0f}x real-time)")


def cmd_roc(args, argv):
    model = read_model(args.model)
    fs = read_features(args.features)
    feats = fs.post
    if args.split != "all":
        feats = pipeline.select_splits(model, feats, args.split)[args.split]
    scores = predict_scores(model.network, model.normalizer, feats)
    curve = roc(scores, [fv.label for fv in feats], args.n_thresholds)
    write_roc_csv(curve, args.out, flags=argv)
    print(f"AUC = {curve.auc:.6f} over {len(feats)} windows ({len(curve.points)} ROC points) -> {args.out}")


def build_parser():
    p = argparse.ArgumentParser(prog="swdetect", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"swdetect {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a synthetic labeled corpus")
    s.add_argument("--config")
    s.add_argument("--seed", dest="gen_seed", type=int, help="corpus seed (overrides config)")
    s.add_argument("--n-per-class", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("extract", help="residual and raw (mu, sigma) per window")
    s.add_argument("--corpus", required=True)
    s.add_argument("--config")
    s.add_argument("--ma-h1", type=int)
    s.add_argument("--ma-h2", type=int)
    s.add_argument("--window-s", type=float, default=20.0)
    s.add_argument("--hop-s", type=float)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("train", help="train the network")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--features")
    src.add_argument("--corpus")
    s.add_argument("--config")
    s.add_argument("--seed", type=int)
    s.add_argument("--epochs", type=int)
    s.add_argument("--lr", type=float)
    s.add_argument("--hidden", type=int)
    s.add_argument("--ma-h1", type=int)
    s.add_argument("--ma-h2", type=int)
    s.add_argument("--model-out", required=True)
    s.add_argument("--report-out")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="confusion, rates, ROC/AUC, effect sizes")
    s.add_argument("--model", required=True)
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--features")
    src.add_argument("--corpus")
    s.add_argument("--split", choices=("train", "val", "test", "all"), default="test")
    s.add_argument("--threshold", type=float, default=0.5)
    s.add_argument("--bins", type=int, default=20)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("detect", help="score sliding windows of long recordings")
    s.add_argument("--model", required=True)
    s.add_argument("--corpus", required=True)
    s.add_argument("--window-s", type=float, default=20.0)
    s.add_argument("--hop-s", type=float)
    s.add_argument("--threshold", type=float, default=0.5)
    s.add_argument("--bench", action="store_true", help="report throughput relative to real time")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("roc", help="ROC points CSV and AUC")
    s.add_argument("--model", required=True)
    s.add_argument("--features", required=True)
    s.add_argument("--split", choices=("train", "val", "test", "all"), default="all")
    s.add_argument("--n-thresholds", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_roc)
    return p


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return exc.code
    try:
        args.func(args, argv)
    except DegenerateDataError as exc:
        print(f"swdetect {args.command}: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except FileNotFoundError as exc:
        print(f"swdetect {args.command}: no such file: {exc.filename}", file=sys.stderr)
        return EXIT_INPUT
    except (SwdError, OSError) as exc:
        print(f"swdetect {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
