"""End-to-end steps shared by the CLI and the tests."""

import time

import numpy as np

from . import SWD
from .ann import predict_scores, train
from .errors import SwdError
from .evaluation import eval_report
from .features import extract, extract_raw, sliding_features
from .io import Model, RunConfig
from .signal_core import DEFAULT_WINDOW_S, prefilter_signal, segment


def corpus_features(signals, config=RunConfig(), window_s=DEFAULT_WINDOW_S, hop_s=None):
    """Residual and raw (mu, sigma) for every window of every signal, in order."""
    post, pre = [], []
    for sig in signals:
        filtered = prefilter_signal(sig, config.filter)
        for w in segment(filtered, window_s, hop_s):
            post.append(extract(w, config.ma))
            pre.append(extract_raw(w))
    return post, pre


def fit(features, config=RunConfig(), flags=None):
    net, nz, report = train(features, config.train)
    return Model(net, nz, config, report.split_ids, flags), report


def select_splits(model, features, split):
    """Map split names to feature subsets.

    ``split="all"`` gives every training split with members present plus
    ``"all"`` (every feature); otherwise only the named split.
    """
    names = ("train", "val", "test") if split == "all" else (split,)
    out = {}
    for name in names:
        ids = set(model.split_ids.get(name, ()))
        part = [fv for fv in features if fv.source_id in ids]
        if part:
            out[name] = part
        elif split != "all":
            raise SwdError(f"no features belong to the model's {name!r} split")
    if split == "all":
        out["all"] = list(features)
    return out


def evaluate(model, features, split="test", threshold=0.5, pre=None, n_bins=20):
    chosen = select_splits(model, features, split)
    blocks = {}
    for name, part in chosen.items():
        scores = predict_scores(model.network, model.normalizer, part)
        blocks[name] = (scores, [fv.label for fv in part])
    key = "all" if split == "all" else split
    ids = {fv.source_id for fv in chosen[key]}
    post_sel = [fv for fv in features if fv.source_id in ids]
    pre_sel = [fv for fv in pre if fv.source_id in ids] if pre is not None else None
    report = eval_report(blocks, threshold, n_bins, post=post_sel, pre=pre_sel)
    report["split"] = split
    return report


def detect(model, signals, window_s=DEFAULT_WINDOW_S, hop_s=None, threshold=0.5):
    """Score sliding windows; returns ``(rows, stats)``.

    Rows are ``(signal id, start sample, start seconds, score, class)`` in
    signal order then time order.
    """
    if hop_s is None:
        hop_s = window_s
    rows = []
    n_samples = 0
    t0 = time.perf_counter()
    for sig in signals:
        length = int(round(window_s * sig.fs))
        hop = int(round(hop_s * sig.fs))
        segment(sig, window_s, hop_s)  # validates length and raises "signal too short"
        filtered = prefilter_signal(sig, model.config.filter)
        feats = sliding_features(filtered, length, hop, model.config.ma)
        scores = predict_scores(model.network, model.normalizer, feats)
        for k, score in enumerate(scores):
            start = k * hop
            rows.append((sig.id, start, start / sig.fs, float(score), SWD if score >= threshold else "nSWD"))
        n_samples += len(sig)
    elapsed = time.perf_counter() - t0
    fs = signals[0].fs if signals else 0.0
    signal_s = n_samples / fs if fs else 0.0
    stats = {
        "windows": len(rows),
        "samples": n_samples,
        "signal_seconds": signal_s,
        "elapsed_seconds": elapsed,
        "realtime_factor": signal_s / elapsed if elapsed > 0 else float("inf"),
    }
    return rows, stats


def labels_of(features):
    return np.array([fv.label == SWD for fv in features])
