"""Persistence: corpus and feature CSVs, JSON config/model/report documents.

Every artifact carries a ``format_version``, the SHA-256 digest of the
producing :class:`RunConfig` and, when written by the CLI, the argument
vector that produced it.  Floats are written with ``repr`` (shortest
round-trip decimal), so reading back is bit-exact.  The byte-level
layout is documented in the README.
"""

import csv
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import LABELS, __version__
from .ann import EpochRecord, Network, TrainConfig, TrainReport
from .datagen import GenConfig
from .errors import (
    FormatError,
    InconsistentFsError,
    MalformedHeaderError,
    MissingHeaderError,
    TruncatedRecordError,
    UnknownLabelError,
    UnsupportedVersionError,
)
from .features import FeatureVector, Normalizer
from .signal_core import FilterConfig, MaConfig, Signal

FORMAT_VERSION = 1
CORPUS_MAGIC = "# swdetect-corpus"
FEATURES_MAGIC = "# swdetect-features"
CORPUS_COLUMNS = ["id", "patient_id", "channel", "label", "fs", "samples"]
FEATURE_COLUMNS = ["id", "label", "mu", "sigma", "mu_raw", "sigma_raw"]

csv.field_size_limit(2**31 - 1)


@dataclass(frozen=True)
class RunConfig:
    ma: MaConfig = field(default_factory=MaConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    gen: GenConfig = field(default_factory=GenConfig)
    paths: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "ma": dataclasses.asdict(self.ma),
            "filter": dataclasses.asdict(self.filter),
            "train": {**dataclasses.asdict(self.train), "split": list(self.train.split)},
            "gen": dataclasses.asdict(self.gen),
            "paths": dict(self.paths),
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(
                ma=MaConfig(**d.get("ma", {})),
                filter=FilterConfig(**d.get("filter", {})),
                train=TrainConfig(**d.get("train", {})),
                gen=GenConfig(**d.get("gen", {})),
                paths=dict(d.get("paths", {})),
            )
        except TypeError as exc:
            raise FormatError(f"bad config field: {exc}") from None

    def digest(self):
        return config_digest(self.to_dict())


def config_digest(d):
    canon = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _provenance(config, flags):
    return {
        "producer": f"swdetect {__version__}",
        "config_digest": config.digest() if config is not None else None,
        "flags": list(flags) if flags is not None else None,
    }


# --------------------------------------------------------------------------
# JSON documents


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, allow_nan=False)
        fh.write("\n")


def _read_json(path, kind):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not a valid JSON document: {exc.msg}", path, exc.lineno) from None
    if not isinstance(doc, dict) or doc.get("format") != kind:
        raise FormatError(f"not a {kind} document", path)
    if doc.get("format_version") != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"unsupported format version {doc.get('format_version')!r} (expected {FORMAT_VERSION})", path
        )
    return doc


def write_config(config, path):
    _write_json(path, {"format": "swdetect-config", "format_version": FORMAT_VERSION, **config.to_dict()})


def read_config(path):
    doc = _read_json(path, "swdetect-config")
    return RunConfig.from_dict({k: v for k, v in doc.items() if k not in ("format", "format_version")})


@dataclass(frozen=True, eq=False)
class Model:
    """Everything :func:`~swdetect.ann.predict` needs, plus provenance."""

    network: Network
    normalizer: Normalizer
    config: RunConfig
    split_ids: dict = field(default_factory=dict)
    flags: Optional[list] = None


def write_model(model, path):
    net = model.network
    doc = {
        "format": "swdetect-model",
        "format_version": FORMAT_VERSION,
        "n_hidden": net.n_hidden,
        "w_in": net.w_in.tolist(),
        "b_in": net.b_in.tolist(),
        "w_out": net.w_out.tolist(),
        "b_out": net.b_out,
        "normalizer": dataclasses.asdict(model.normalizer),
        "seed": model.config.train.seed,
        "config": model.config.to_dict(),
        "split_ids": model.split_ids,
        **_provenance(model.config, model.flags),
    }
    _write_json(path, doc)


def read_model(path):
    doc = _read_json(path, "swdetect-model")
    try:
        net = Network(doc["w_in"], doc["b_in"], doc["w_out"], doc["b_out"])
        if net.n_hidden != doc["n_hidden"]:
            raise FormatError(f"n_hidden {doc['n_hidden']} disagrees with weight shapes", path)
        return Model(
            net,
            Normalizer(**doc["normalizer"]),
            RunConfig.from_dict(doc["config"]),
            doc.get("split_ids", {}),
            doc.get("flags"),
        )
    except KeyError as exc:
        raise FormatError(f"model document lacks field {exc}", path) from None


def train_report_dict(report):
    return {
        "best_epoch": report.best_epoch,
        "stop_reason": report.stop_reason,
        "epochs": [dataclasses.asdict(r) for r in report.epochs],
        "split_sizes": {k: len(v) for k, v in report.split_ids.items()},
    }


def write_train_report(report, path, config=None, flags=None):
    doc = {"format": "swdetect-train-report", "format_version": FORMAT_VERSION}
    doc.update(train_report_dict(report))
    doc["split_ids"] = report.split_ids
    doc.update(_provenance(config, flags))
    _write_json(path, doc)


def read_train_report(path):
    doc = _read_json(path, "swdetect-train-report")
    return TrainReport(
        [EpochRecord(**r) for r in doc["epochs"]], doc["best_epoch"], doc["stop_reason"], doc.get("split_ids", {})
    )


def write_eval_report(report, path, config=None, flags=None):
    """``report`` is the plain dict built by :func:`swdetect.evaluation.eval_report`."""
    _write_json(
        path,
        {"format": "swdetect-eval-report", "format_version": FORMAT_VERSION, **report, **_provenance(config, flags)},
    )


def read_eval_report(path):
    return _read_json(path, "swdetect-eval-report")


# --------------------------------------------------------------------------
# CSV files with "# key: json" header lines


def _write_header(fh, magic, meta):
    fh.write(magic + "\n")
    for key, value in meta.items():
        fh.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")


def _read_header(fh, path, magic):
    first = fh.readline()
    if not first:
        raise MissingHeaderError("missing header (empty file)", path, 1)
    if first.rstrip("\r\n") != magic:
        raise MissingHeaderError(f"missing header: expected {magic!r}", path, 1)
    meta = {}
    lineno = 1
    while True:
        pos = fh.tell()
        line = fh.readline()
        if not line.startswith("#"):
            fh.seek(pos)
            break
        lineno += 1
        key, sep, value = line[1:].partition(":")
        if not sep:
            raise MalformedHeaderError(f"header line is not 'key: value': {line.strip()!r}", path, lineno)
        try:
            meta[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            raise MalformedHeaderError(f"header value for {key.strip()!r} is not JSON", path, lineno) from None
    if meta.get("format_version") != FORMAT_VERSION:
        if "format_version" not in meta:
            raise MalformedHeaderError("header lacks format_version", path, lineno)
        raise UnsupportedVersionError(f"unsupported format version {meta['format_version']!r}", path, lineno)
    return meta, lineno


def _parse_float(text, path, line, what):
    try:
        return float(text)
    except ValueError:
        raise TruncatedRecordError(f"{what} is not a number: {text[:40]!r}", path, line) from None


def write_corpus(signals, path, source=None, config=None, flags=None):
    """One CSV record per signal; samples are one space-separated field."""
    signals = list(signals)
    if not signals:
        raise FormatError("refusing to write an empty corpus", path)
    fs = signals[0].fs
    n = len(signals[0])
    for s in signals:
        if s.fs != fs:
            raise InconsistentFsError(f"signal {s.id!r} has fs={s.fs}, corpus fs={fs}", path)
        if len(s) != n:
            raise FormatError(f"signal {s.id!r} has {len(s)} samples, expected {n}", path)
    meta = {"format_version": FORMAT_VERSION, "fs": fs, "duration_s": n / fs, "n_samples": n, "source": source}
    meta.update(_provenance(config, flags))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_header(fh, CORPUS_MAGIC, meta)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CORPUS_COLUMNS)
        for s in signals:
            w.writerow([s.id, s.patient_id or "", s.channel, s.label or "", repr(float(s.fs)),
                        " ".join(map(repr, s.samples.tolist()))])


def read_corpus(path):
    """Returns ``(signals, meta)``."""
    with open(path, encoding="utf-8", newline="") as fh:
        meta, lineno = _read_header(fh, path, CORPUS_MAGIC)
        for key in ("fs", "n_samples"):
            if not isinstance(meta.get(key), (int, float)) or meta[key] <= 0:
                raise MalformedHeaderError(f"header lacks a positive {key}", path, lineno)
        fs, n = float(meta["fs"]), int(meta["n_samples"])
        reader = csv.reader(fh)
        lineno += 1
        cols = next(reader, None)
        if cols != CORPUS_COLUMNS:
            raise MalformedHeaderError(f"expected columns {CORPUS_COLUMNS}, got {cols}", path, lineno)
        signals = []
        for row in reader:
            lineno += 1
            if not row:
                continue
            if len(row) != len(CORPUS_COLUMNS):
                raise TruncatedRecordError(f"record has {len(row)} fields, expected {len(CORPUS_COLUMNS)}", path, lineno)
            sid, patient, channel, label, rec_fs, samples = row
            if label and label not in LABELS:
                raise UnknownLabelError(f"unknown label {label!r} in record {sid!r}", path, lineno)
            if _parse_float(rec_fs, path, lineno, "fs") != fs:
                raise InconsistentFsError(f"record {sid!r} has fs={rec_fs}, header fs={fs}", path, lineno)
            values = [_parse_float(v, path, lineno, "sample") for v in samples.split()]
            if len(values) != n:
                raise TruncatedRecordError(
                    f"record {sid!r} has {len(values)} samples, header says {n}", path, lineno
                )
            signals.append(Signal(np.array(values), fs, channel, label or None, patient or None, sid))
    return signals, meta


@dataclass(eq=False)
class FeatureSet:
    """Residual features plus, when present, raw-window features per record."""

    post: List[FeatureVector]
    pre: Optional[List[FeatureVector]] = None
    meta: dict = field(default_factory=dict)


def write_features(features, path, raw=None, config=None, flags=None):
    features = list(features)
    if raw is not None and len(raw) != len(features):
        raise FormatError("raw and residual feature lists differ in length", path)
    meta = {"format_version": FORMAT_VERSION}
    if config is not None:
        meta["ma"] = dataclasses.asdict(config.ma)
        meta["filter"] = dataclasses.asdict(config.filter)
    meta.update(_provenance(config, flags))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_header(fh, FEATURES_MAGIC, meta)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FEATURE_COLUMNS)
        for i, fv in enumerate(features):
            extra = [repr(raw[i].mu), repr(raw[i].sigma)] if raw is not None else ["", ""]
            w.writerow([fv.source_id, fv.label or "", repr(fv.mu), repr(fv.sigma), *extra])


def read_features(path):
    with open(path, encoding="utf-8", newline="") as fh:
        meta, lineno = _read_header(fh, path, FEATURES_MAGIC)
        reader = csv.reader(fh)
        lineno += 1
        cols = next(reader, None)
        if cols != FEATURE_COLUMNS:
            raise MalformedHeaderError(f"expected columns {FEATURE_COLUMNS}, got {cols}", path, lineno)
        post, pre = [], []
        for row in reader:
            lineno += 1
            if not row:
                continue
            if len(row) != len(FEATURE_COLUMNS):
                raise TruncatedRecordError(f"record has {len(row)} fields, expected {len(FEATURE_COLUMNS)}", path, lineno)
            sid, label, mu, sigma, mu_raw, sigma_raw = row
            if label and label not in LABELS:
                raise UnknownLabelError(f"unknown label {label!r} in record {sid!r}", path, lineno)
            label = label or None
            post.append(FeatureVector(_parse_float(mu, path, lineno, "mu"),
                                      _parse_float(sigma, path, lineno, "sigma"), sid, label))
            if mu_raw or sigma_raw:
                pre.append(FeatureVector(_parse_float(mu_raw, path, lineno, "mu_raw"),
                                         _parse_float(sigma_raw, path, lineno, "sigma_raw"), sid, label))
    if pre and len(pre) != len(post):
        raise FormatError("raw feature columns are filled for some records only", path)
    return FeatureSet(post, pre or None, meta)


def write_roc_csv(curve, path, flags=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_header(fh, "# swdetect-roc", {"format_version": FORMAT_VERSION, "auc": curve.auc,
                                             **_provenance(None, flags)})
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["threshold", "fpr", "tpr"])
        for fpr, tpr, thr in curve.points:
            w.writerow([repr(thr), repr(fpr), repr(tpr)])


def write_detections(rows, path, meta):
    """``rows`` are ``(id, start_index, start_s, score, label)`` tuples."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_header(fh, "# swdetect-detections", {"format_version": FORMAT_VERSION, **meta})
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "window_start", "window_start_s", "score", "class"])
        for sid, start, start_s, score, label in rows:
            w.writerow([sid, start, repr(start_s), repr(score), label])
