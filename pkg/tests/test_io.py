import json

import numpy as np
import pytest

from swdetect import NSWD, SWD
from swdetect.ann import TrainConfig, forward_batch, train
from swdetect.datagen import GenConfig, gen_corpus
from swdetect.errors import (
    FormatError,
    InconsistentFsError,
    MalformedHeaderError,
    MissingHeaderError,
    TruncatedRecordError,
    UnknownLabelError,
    UnsupportedVersionError,
)
from swdetect.features import FeatureVector
from swdetect.io import (
    Model,
    RunConfig,
    read_config,
    read_corpus,
    read_features,
    read_model,
    read_train_report,
    write_config,
    write_corpus,
    write_features,
    write_model,
    write_train_report,
)
from swdetect.rng import Rng
from swdetect.signal_core import MaConfig, Signal


@pytest.fixture
def corpus():
    return gen_corpus(GenConfig(n_per_class=3, duration_s=2.0))


def test_corpus_round_trip(tmp_path, corpus):
    path = tmp_path / "c.csv"
    write_corpus(corpus, path, source={"note": "test"}, config=RunConfig(), flags=["simulate"])
    back, meta = read_corpus(path)
    assert back == corpus
    assert meta["fs"] == 256.0 and meta["source"] == {"note": "test"}
    assert meta["config_digest"] == RunConfig().digest() and meta["flags"] == ["simulate"]


def test_corpus_extreme_values_round_trip(tmp_path):
    x = np.array([5e-324, -1.7976931348623157e308, 0.1, 1 / 3, -0.0, 123456789.123456789])
    sig = Signal(x, 100.0, "Cz", None, None, "odd")
    write_corpus([sig], tmp_path / "c.csv")
    (back,), _ = read_corpus(tmp_path / "c.csv")
    assert back.samples.tobytes() == sig.samples.tobytes()


def _rewrite(path, old, new, count=1):
    text = path.read_text()
    assert old in text
    path.write_text(text.replace(old, new, count))


def test_unknown_label(tmp_path, corpus):
    path = tmp_path / "c.csv"
    write_corpus(corpus, path)
    _rewrite(path, ",SWD,", ",maybe,")
    with pytest.raises(UnknownLabelError, match="maybe") as exc:
        read_corpus(path)
    assert exc.value.line is not None


def test_empty_file(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("")
    with pytest.raises(MissingHeaderError, match="missing header"):
        read_corpus(path)


def test_malformed_header(tmp_path, corpus):
    path = tmp_path / "c.csv"
    write_corpus(corpus, path)
    _rewrite(path, "# fs: 256.0", "# fs: {oops")
    with pytest.raises(MalformedHeaderError):
        read_corpus(path)


def test_inconsistent_fs(tmp_path, corpus):
    path = tmp_path / "c.csv"
    write_corpus(corpus, path)
    _rewrite(path, ",256.0,", ",512.0,")
    with pytest.raises(InconsistentFsError):
        read_corpus(path)
    with pytest.raises(InconsistentFsError):
        write_corpus([corpus[0], Signal(corpus[1].samples, 128.0)], tmp_path / "d.csv")


def test_truncated_record(tmp_path, corpus):
    path = tmp_path / "c.csv"
    write_corpus(corpus, path)
    lines = path.read_text().splitlines()
    lines[-1] = lines[-1].rsplit(" ", 5)[0]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(TruncatedRecordError, match="samples"):
        read_corpus(path)
    lines[-1] = "nswd-0002,synthetic"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(TruncatedRecordError, match="fields"):
        read_corpus(path)


def test_unsupported_version(tmp_path, corpus):
    path = tmp_path / "c.csv"
    write_corpus(corpus, path)
    _rewrite(path, "# format_version: 1", "# format_version: 9")
    with pytest.raises(UnsupportedVersionError, match="unsupported format version"):
        read_corpus(path)


def test_config_round_trip(tmp_path):
    cfg = RunConfig()
    write_config(cfg, tmp_path / "cfg.json")
    assert read_config(tmp_path / "cfg.json") == cfg
    custom = RunConfig(ma=MaConfig(3, 30), train=TrainConfig(seed=9, split=(0.6, 0.2, 0.2)),
                       gen=GenConfig(n_per_class=5), paths={"out": "x"})
    write_config(custom, tmp_path / "cfg2.json")
    back = read_config(tmp_path / "cfg2.json")
    assert back == custom and back.digest() == custom.digest()


def test_config_version_mismatch(tmp_path):
    write_config(RunConfig(), tmp_path / "cfg.json")
    doc = json.loads((tmp_path / "cfg.json").read_text())
    doc["format_version"] = 2
    (tmp_path / "cfg.json").write_text(json.dumps(doc))
    with pytest.raises(UnsupportedVersionError):
        read_config(tmp_path / "cfg.json")


def _labeled(n=40):
    rng = Rng(4)
    return [FeatureVector(float(m) + (i % 2), float(abs(s)) + 3 * (i % 2), f"w{i}", SWD if i % 2 else NSWD)
            for i, (m, s) in enumerate(zip(rng.normal(n), rng.normal(n)))]


def test_model_round_trip_bit_exact(tmp_path):
    cfg = RunConfig(train=TrainConfig(seed=3, max_epochs=20))
    net, nz, rep = train(_labeled(), cfg.train)
    model = Model(net, nz, cfg, rep.split_ids, ["train", "--seed", "3"])
    write_model(model, tmp_path / "m.json")
    back = read_model(tmp_path / "m.json")
    assert back.network == net and back.normalizer == nz and back.config == cfg
    assert back.split_ids == rep.split_ids and back.flags == ["train", "--seed", "3"]
    X = Rng(8).normal(200).reshape(100, 2)
    assert forward_batch(back.network, X).tobytes() == forward_batch(net, X).tobytes()
    write_model(back, tmp_path / "m2.json")
    assert (tmp_path / "m.json").read_bytes() == (tmp_path / "m2.json").read_bytes()


def test_model_missing_field(tmp_path):
    net, nz, rep = train(_labeled(), TrainConfig(max_epochs=2))
    write_model(Model(net, nz, RunConfig()), tmp_path / "m.json")
    doc = json.loads((tmp_path / "m.json").read_text())
    del doc["w_out"]
    (tmp_path / "m.json").write_text(json.dumps(doc))
    with pytest.raises(FormatError, match="w_out"):
        read_model(tmp_path / "m.json")


def test_train_report_round_trip(tmp_path):
    _, _, rep = train(_labeled(), TrainConfig(max_epochs=5))
    write_train_report(rep, tmp_path / "r.json")
    assert read_train_report(tmp_path / "r.json") == rep


def test_features_round_trip(tmp_path):
    post = _labeled()
    pre = [FeatureVector(fv.mu * 2, fv.sigma * 3 + 0.1, fv.source_id, fv.label) for fv in post]
    write_features(post, tmp_path / "f.csv", raw=pre, config=RunConfig())
    fs = read_features(tmp_path / "f.csv")
    assert fs.post == post and fs.pre == pre
    assert fs.meta["ma"] == {"h1": 2, "h2": 42}
    header = [l for l in (tmp_path / "f.csv").read_text().splitlines() if not l.startswith("#")][0]
    assert header.split(",")[:4] == ["id", "label", "mu", "sigma"]
    write_features(post, tmp_path / "g.csv")
    assert read_features(tmp_path / "g.csv").pre is None
