"""Gaussian maximum-likelihood features of the MA residual."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateDataError, SwdError
from .signal_core import MaConfig, Window, residual_values

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class FeatureVector:
    mu: float
    sigma: float
    source_id: str = ""
    label: Optional[str] = None

    def __post_init__(self):
        if not self.sigma >= 0:
            raise SwdError(f"sigma must be non-negative, got {self.sigma}")

    def as_tuple(self):
        return (self.mu, self.sigma)


def _checked(values):
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise SwdError(f"expected a 1-D sequence, got shape {x.shape}")
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise SwdError(f"non-finite sample at index {bad[0]}: {x[bad[0]]}")
    return x


def gaussian_mle(values):
    """Closed-form normal MLE: the mean and the 1/n (biased) standard deviation.

    Two-pass: the mean first, then the mean squared deviation from it.
    """
    x = _checked(values)
    n = len(x)
    if n < 2:
        raise SwdError(f"insufficient samples for MLE: need 2, got {n}")
    mu = float(np.sum(x) / n)
    d = x - mu
    sigma = math.sqrt(float(np.dot(d, d)) / n)
    return mu, sigma


def log_likelihood(values, mu, sigma):
    """Sum of normal log-densities of ``values`` under N(mu, sigma**2)."""
    if not sigma > 0:
        raise SwdError(f"log-likelihood needs sigma > 0, got {sigma}")
    x = np.asarray(values, dtype=np.float64)
    z = (x - mu) / sigma
    return float(-len(x) * (math.log(sigma) + LOG_SQRT_2PI) - 0.5 * np.dot(z, z))


def extract(window, config=MaConfig()):
    """(mu, sigma) of the MA residual of one window."""
    mu, sigma = gaussian_mle(residual_values(window.values, config))
    return FeatureVector(mu, sigma, window.source_id, window.parent.label)


def extract_raw(window):
    """(mu, sigma) of the window itself, without the MA residual."""
    mu, sigma = gaussian_mle(window.values)
    return FeatureVector(mu, sigma, window.source_id, window.parent.label)


def sliding_features(signal, length, hop, config=MaConfig()):
    """Residual features for every window of ``length`` samples every ``hop``.

    The residual is computed once over the whole signal and sliced, which
    gives the same values as :func:`extract` on each :class:`Window`
    because every moving-average output only reads samples inside its
    own window.
    """
    n = len(signal)
    config.check_length(length)
    res = residual_values(signal.samples, config)
    m = length - 2 * config.h2
    out = []
    for start in range(0, n - length + 1, hop):
        mu, sigma = gaussian_mle(res[start : start + m])
        out.append(FeatureVector(mu, sigma, f"{signal.id}@{start}", signal.label))
    return out


@dataclass(frozen=True)
class Normalizer:
    """Per-coordinate affine map fitted on training features.

    ``kind="zscore"`` stores (mean, std); ``kind="minmax"`` stores
    (min, max - min) in the same slots, so :func:`normalize` is always
    ``(x - mean) / std``.
    """

    mu_mean: float
    mu_std: float
    sigma_mean: float
    sigma_std: float
    kind: str = "zscore"

    def __post_init__(self):
        if not (self.mu_std > 0 and self.sigma_std > 0):
            raise DegenerateDataError("degenerate training features: zero spread in mu or sigma")


def fit_normalizer(train_features, kind="zscore"):
    f = list(train_features)
    if len(f) < 2:
        raise DegenerateDataError(f"degenerate training features: need 2, got {len(f)}")
    arr = np.array([fv.as_tuple() for fv in f], dtype=np.float64)
    if kind == "zscore":
        loc = arr.mean(axis=0)
        scale = arr.std(axis=0)
    elif kind == "minmax":
        loc = arr.min(axis=0)
        scale = arr.max(axis=0) - loc
    else:
        raise SwdError(f"unknown normalizer kind {kind!r}")
    return Normalizer(float(loc[0]), float(scale[0]), float(loc[1]), float(scale[1]), kind)


def normalize(nz, fv):
    return ((fv.mu - nz.mu_mean) / nz.mu_std, (fv.sigma - nz.sigma_mean) / nz.sigma_std)


def normalize_array(nz, features):
    """Vectorized :func:`normalize`; returns an (n, 2) array."""
    arr = np.array([fv.as_tuple() for fv in features], dtype=np.float64).reshape(-1, 2)
    loc = np.array([nz.mu_mean, nz.sigma_mean])
    scale = np.array([nz.mu_std, nz.sigma_std])
    return (arr - loc) / scale
