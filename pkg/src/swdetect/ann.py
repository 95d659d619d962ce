"""One-hidden-layer sigmoid network trained by full-batch backpropagation.

Inputs are the normalized feature pair (mu, sigma); the single sigmoid
output is read as P(SWD).  The cost is the mean squared error between
output and the 1/0 class target.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import NSWD, SWD
from .errors import DegenerateDataError, SwdError
from .features import Normalizer, fit_normalizer, normalize, normalize_array
from .rng import Rng

N_INPUTS = 2
GRADIENT_FLOOR = 1e-7


def sigmoid(eta):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-eta))


@dataclass(frozen=True, eq=False)
class Network:
    w_in: np.ndarray  # (n_hidden, 2)
    b_in: np.ndarray  # (n_hidden,)
    w_out: np.ndarray  # (n_hidden,)
    b_out: float

    def __post_init__(self):
        w_in = np.array(self.w_in, dtype=np.float64)
        b_in = np.array(self.b_in, dtype=np.float64).reshape(-1)
        w_out = np.array(self.w_out, dtype=np.float64).reshape(-1)
        h = len(b_in)
        if h < 1 or w_in.shape != (h, N_INPUTS) or w_out.shape != (h,):
            raise SwdError(
                f"inconsistent network shapes: w_in {w_in.shape}, b_in {b_in.shape}, w_out {w_out.shape}"
            )
        for arr in (w_in, b_in, w_out):
            arr.setflags(write=False)
        object.__setattr__(self, "w_in", w_in)
        object.__setattr__(self, "b_in", b_in)
        object.__setattr__(self, "w_out", w_out)
        object.__setattr__(self, "b_out", float(self.b_out))
        if not all(np.all(np.isfinite(a)) for a in (w_in, b_in, w_out)) or not np.isfinite(self.b_out):
            raise SwdError("network parameters must be finite")

    @property
    def n_hidden(self):
        return len(self.b_in)

    def flat(self):
        return np.concatenate([self.w_in.ravel(), self.b_in, self.w_out, [self.b_out]])

    @classmethod
    def from_flat(cls, theta, n_hidden):
        h = n_hidden
        theta = np.asarray(theta, dtype=np.float64)
        return cls(theta[: 2 * h].reshape(h, 2), theta[2 * h : 3 * h], theta[3 * h : 4 * h], theta[4 * h])

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return np.array_equal(self.flat(), other.flat()) and self.n_hidden == other.n_hidden


def init_network(n_hidden, rng):
    """Weights and biases uniform on [-0.5, 0.5], drawn in ``flat()`` order."""
    if n_hidden < 1:
        raise SwdError(f"n_hidden must be >= 1, got {n_hidden}")
    return Network.from_flat(rng.uniform(-0.5, 0.5, 4 * n_hidden + 1), n_hidden)


def _as_inputs(X):
    X = np.asarray(X, dtype=np.float64).reshape(-1, N_INPUTS)
    if not np.all(np.isfinite(X)):
        raise SwdError("network inputs must be finite")
    return X


def _forward_all(net, X):
    hidden = sigmoid(X @ net.w_in.T + net.b_in)
    out = sigmoid(hidden @ net.w_out + net.b_out)
    return hidden, out


def forward(net, p):
    """Network output for one input pair."""
    _, out = _forward_all(net, _as_inputs(p))
    return float(out[0])


def forward_batch(net, X):
    return _forward_all(net, _as_inputs(X))[1]


def _batch(X, y):
    X = _as_inputs(X)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if len(X) == 0:
        raise SwdError("empty batch")
    if len(X) != len(y):
        raise SwdError(f"batch has {len(X)} inputs but {len(y)} targets")
    return X, y


def loss(net, X, y):
    """Mean squared error between outputs and targets (1 = SWD, 0 = nSWD)."""
    X, y = _batch(X, y)
    r = forward_batch(net, X) - y
    return float(np.dot(r, r) / len(y))


def backprop_grad(net, X, y):
    """Analytic gradient of :func:`loss`, returned as a same-shaped Network."""
    X, y = _batch(X, y)
    n = len(y)
    hidden, out = _forward_all(net, X)
    d_out = 2.0 * (out - y) / n * out * (1.0 - out)  # dL/d(eta_out), (n,)
    g_w_out = hidden.T @ d_out
    g_b_out = float(np.sum(d_out))
    d_hidden = np.outer(d_out, net.w_out) * hidden * (1.0 - hidden)  # (n, h)
    g_w_in = d_hidden.T @ X
    g_b_in = d_hidden.sum(axis=0)
    return Network(g_w_in, g_b_in, g_w_out, g_b_out)


def gd_step(net, grad, learning_rate):
    return Network.from_flat(net.flat() - learning_rate * grad.flat(), net.n_hidden)


@dataclass(frozen=True)
class TrainConfig:
    n_hidden: int = 10
    learning_rate: float = 1.0
    max_epochs: int = 100
    patience: int = 6
    seed: int = 0
    split: Tuple[float, float, float] = (0.70, 0.15, 0.15)
    normalizer: str = "zscore"

    def __post_init__(self):
        object.__setattr__(self, "split", tuple(float(s) for s in self.split))
        if len(self.split) != 3 or any(s <= 0 for s in self.split) or abs(sum(self.split) - 1.0) > 1e-9:
            raise SwdError(f"split fractions must be three positives summing to 1, got {self.split}")
        if self.n_hidden < 1 or self.max_epochs < 0 or self.patience < 1:
            raise SwdError("n_hidden and patience must be >= 1, max_epochs >= 0")
        if not self.learning_rate > 0:
            raise SwdError(f"learning rate must be positive, got {self.learning_rate}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise SwdError(f"seed must be a non-negative integer, got {self.seed}")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    test_loss: float
    gradient_norm: float


@dataclass(frozen=True)
class TrainReport:
    epochs: List[EpochRecord]
    best_epoch: int
    stop_reason: str  # "patience" | "max_epochs" | "gradient_floor"
    split_ids: dict = field(default_factory=dict)


def split_indices(n, cfg):
    """Seeded shuffle, then consecutive train/val/test blocks.

    Block sizes are ``round(n * f_train)`` and ``round(n * f_val)``; the
    test split takes the rest.
    """
    perm = Rng(cfg.seed, 1).permutation(n)
    n_train = int(round(n * cfg.split[0]))
    n_val = int(round(n * cfg.split[1]))
    return perm[:n_train], perm[n_train : n_train + n_val], perm[n_train + n_val :]


def targets(features):
    return np.array([1.0 if fv.label == SWD else 0.0 for fv in features])


def train(features, cfg=TrainConfig()):
    """Fit a network on labeled features.

    Returns ``(network, normalizer, report)``.  Epoch 0 records the
    untrained network; the returned network is the snapshot with the
    lowest validation loss.  Training stops after ``cfg.patience``
    consecutive epochs without a new validation minimum, when the
    gradient norm drops below 1e-7, or at ``cfg.max_epochs``.
    """
    feats = list(features)
    if len(feats) < 10:
        raise DegenerateDataError(f"training needs at least 10 examples, got {len(feats)}")
    for fv in feats:
        if fv.label not in (SWD, NSWD):
            raise SwdError(f"unlabeled or mislabeled feature {fv.source_id!r}: {fv.label!r}")

    idx = split_indices(len(feats), cfg)
    splits = {}
    for name, ix in zip(("train", "val", "test"), idx):
        part = [feats[i] for i in ix]
        labels = {fv.label for fv in part}
        if labels != {SWD, NSWD}:
            raise DegenerateDataError(f"degenerate split: {name!r} split holds classes {sorted(labels)}")
        splits[name] = part

    nz = fit_normalizer(splits["train"], kind=cfg.normalizer)
    data = {name: (normalize_array(nz, part), targets(part)) for name, part in splits.items()}
    Xtr, ytr = data["train"]

    net = init_network(cfg.n_hidden, Rng(cfg.seed, 2))
    records = []
    best_net, best_epoch, best_val = net, 0, float("inf")
    fails = 0
    stop_reason = "max_epochs"
    epoch = 0
    while True:
        grad = backprop_grad(net, Xtr, ytr)
        gnorm = float(np.linalg.norm(grad.flat()))
        rec = EpochRecord(
            epoch,
            loss(net, *data["train"]),
            loss(net, *data["val"]),
            loss(net, *data["test"]),
            gnorm,
        )
        records.append(rec)
        if rec.val_loss < best_val:
            best_net, best_epoch, best_val = net, epoch, rec.val_loss
            fails = 0
        else:
            fails += 1
        if fails >= cfg.patience:
            stop_reason = "patience"
            break
        if gnorm < GRADIENT_FLOOR:
            stop_reason = "gradient_floor"
            break
        if epoch >= cfg.max_epochs:
            break
        net = gd_step(net, grad, cfg.learning_rate)
        epoch += 1

    split_ids = {name: [fv.source_id for fv in part] for name, part in splits.items()}
    return best_net, nz, TrainReport(records, best_epoch, stop_reason, split_ids)


def predict(net, nz, fv, threshold=0.5):
    """Returns ``(label, score)``; a score equal to the threshold counts as SWD."""
    score = forward(net, normalize(nz, fv))
    return (SWD if score >= threshold else NSWD), score


def predict_scores(net, nz, features):
    return forward_batch(net, normalize_array(nz, features))
