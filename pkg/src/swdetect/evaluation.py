"""Classifier evaluation: confusion counts, rates, ROC/AUC, error histogram,
per-class descriptive statistics, Cohen's d with Welch p-values.

SWD is the positive class throughout.
"""

import math
import sys
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import NSWD, SWD
from .errors import DegenerateDataError, SwdError
from .features import gaussian_mle

# Precision of the incomplete-beta continued fraction.
BETACF_EPS = 1e-15
BETACF_MAX_ITER = 10_000


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise SwdError("confusion counts must be non-negative")

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """Rates in [0, 1]; ``None`` marks a rate whose denominator is zero."""

    tpr: Optional[float]
    tnr: Optional[float]
    fpr: Optional[float]
    fnr: Optional[float]
    misclassification: float
    precision: Optional[float]
    prevalence: float
    accuracy: float


@dataclass(frozen=True)
class RocCurve:
    points: List[Tuple[float, float, float]]  # (fpr, tpr, threshold), threshold descending
    auc: float


@dataclass(frozen=True)
class EffectSize:
    cohens_d: float
    p_value: float
    t_statistic: float
    df: float


def _as_binary(values, what):
    out = []
    for v in values:
        if v in (SWD, 1, True):
            out.append(1)
        elif v in (NSWD, 0, False):
            out.append(0)
        else:
            raise SwdError(f"{what} entry {v!r} is neither SWD/1 nor nSWD/0")
    return np.array(out, dtype=np.int64)


def confusion(predictions, labels):
    """Counts with SWD as positive; entries may be labels or 1/0."""
    p = _as_binary(predictions, "prediction")
    y = _as_binary(labels, "label")
    if len(p) != len(y):
        raise SwdError(f"length mismatch: {len(p)} predictions vs {len(y)} labels")
    if len(y) == 0:
        raise SwdError("confusion matrix of an empty evaluation")
    return ConfusionMatrix(
        tp=int(np.sum((p == 1) & (y == 1))),
        tn=int(np.sum((p == 0) & (y == 0))),
        fp=int(np.sum((p == 1) & (y == 0))),
        fn=int(np.sum((p == 0) & (y == 1))),
    )


def _ratio(num, den):
    return num / den if den > 0 else None


def metrics(cm):
    total = cm.total
    if total == 0:
        raise SwdError("metrics of an all-zero confusion matrix")
    acc = (cm.tp + cm.tn) / total
    return MetricsReport(
        tpr=_ratio(cm.tp, cm.tp + cm.fn),
        tnr=_ratio(cm.tn, cm.tn + cm.fp),
        fpr=_ratio(cm.fp, cm.tn + cm.fp),
        fnr=_ratio(cm.fn, cm.tp + cm.fn),
        misclassification=(cm.fp + cm.fn) / total,
        precision=_ratio(cm.tp, cm.tp + cm.fp),
        prevalence=(cm.tp + cm.fn) / total,
        accuracy=acc,
    )


def roc(scores, labels, n_thresholds=None):
    """ROC by sweeping every distinct score as a threshold (score >= t is SWD).

    The curve starts at threshold +inf, i.e. (0, 0), and ends at -inf, i.e.
    (1, 1).  AUC is the trapezoid area, which equals the Mann-Whitney
    probability with ties counted one half.  ``n_thresholds`` only thins
    the returned points (endpoints kept); the AUC always uses the full
    sweep.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = _as_binary(labels, "label")
    if len(s) != len(y):
        raise SwdError(f"length mismatch: {len(s)} scores vs {len(y)} labels")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateDataError("ROC needs both classes present")

    order = np.argsort(-s, kind="stable")
    s_sorted, y_sorted = s[order], y[order]
    # last index of each run of equal scores
    ends = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tp = np.cumsum(y_sorted)[ends]
    fp = (ends + 1) - tp
    tpr = np.r_[0, tp] / n_pos
    fpr = np.r_[0, fp] / n_neg
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1])) / 2.0)

    thr = np.r_[np.inf, s_sorted[ends]]
    points = [(float(a), float(b), float(t)) for a, b, t in zip(fpr, tpr, thr)]
    points.append((1.0, 1.0, -math.inf))
    if n_thresholds is not None and len(points) > n_thresholds >= 2:
        keep = np.unique(np.round(np.linspace(0, len(points) - 1, n_thresholds)).astype(int))
        points = [points[i] for i in keep]
    return RocCurve(points, auc)


def error_histogram(outputs, targets, n_bins=20):
    """Histogram of ``targets - outputs`` over equal-width bins on [min, max].

    Returns ``(edges, counts)`` with ``len(edges) == n_bins + 1``.  When all
    errors coincide the range is widened by 0.5 on each side.
    """
    o = np.asarray(outputs, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if len(o) != len(t):
        raise SwdError(f"length mismatch: {len(o)} outputs vs {len(t)} targets")
    if len(o) == 0:
        raise SwdError("error histogram of empty input")
    err = t - o
    lo, hi = float(err.min()), float(err.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(err, bins=n_bins, range=(lo, hi))
    return edges, counts


@dataclass(frozen=True)
class ClassStats:
    n: int
    mu_mean: float
    mu_std: float
    sigma_mean: float
    sigma_std: float


def descriptive_stats(features):
    """Per-class mean and 1/n standard deviation of the mu and sigma features."""
    by_class = {}
    for label in (SWD, NSWD):
        f = [fv for fv in features if fv.label == label]
        if len(f) < 2:
            raise DegenerateDataError(f"class {label} has {len(f)} features, need at least 2")
        mu_m, mu_s = gaussian_mle([fv.mu for fv in f])
        sg_m, sg_s = gaussian_mle([fv.sigma for fv in f])
        by_class[label] = ClassStats(len(f), mu_m, mu_s, sg_m, sg_s)
    return by_class


# --------------------------------------------------------------------------
# Student t tail via the regularized incomplete beta function


def _betacf(a, b, x):
    """Continued fraction for I_x(a, b), modified Lentz's method."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for m in range(1, BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < BETACF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def betainc(a, b, x):
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if not (a > 0 and b > 0):
        raise ValueError("betainc needs a, b > 0")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"betainc needs 0 <= x <= 1, got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t, df):
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def welch_t(x1, x0):
    """Welch's t statistic and Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(x1, dtype=np.float64)
    b = np.asarray(x0, dtype=np.float64)
    v1 = a.var(ddof=1) / len(a)
    v0 = b.var(ddof=1) / len(b)
    se2 = v1 + v0
    diff = a.mean() - b.mean()
    if se2 == 0:
        if diff == 0:
            return 0.0, float(len(a) + len(b) - 2)
        return math.copysign(math.inf, diff), float(len(a) + len(b) - 2)
    r1, r0 = v1 / se2, v0 / se2  # ratios keep tiny variances from underflowing when squared
    df = 1.0 / (r1 * r1 / (len(a) - 1) + r0 * r0 / (len(b) - 1))
    return float(diff / math.sqrt(se2)), float(df)


def effect_size(class1, class0):
    """Cohen's d with the pooled (n-1) standard deviation; two-sided Welch p-value.

    A p-value that underflows double precision is reported as the smallest
    positive subnormal so that it stays in (0, 1].
    """
    a = np.asarray(class1, dtype=np.float64)
    b = np.asarray(class0, dtype=np.float64)
    n1, n0 = len(a), len(b)
    if n1 < 2 or n0 < 2:
        raise DegenerateDataError(f"effect size needs >= 2 values per class, got {n1} and {n0}")
    pooled = math.sqrt(((n1 - 1) * a.var(ddof=1) + (n0 - 1) * b.var(ddof=1)) / (n1 + n0 - 2))
    if pooled == 0:
        raise DegenerateDataError("zero pooled standard deviation")
    d = float((a.mean() - b.mean()) / pooled)
    t, df = welch_t(a, b)
    p = min(1.0, max(t_two_sided_p(t, df), sys.float_info.min * sys.float_info.epsilon))
    return EffectSize(d, p, t, df)


# --------------------------------------------------------------------------
# Report assembly


def _split_block(scores, labels, threshold, n_bins):
    y = _as_binary(labels, "label")
    pred = (np.asarray(scores) >= threshold).astype(np.int64)
    cm = confusion(pred, y)
    block = {"n": len(y), "confusion": asdict(cm), "metrics": asdict(metrics(cm))}
    if 0 < y.sum() < len(y):
        curve = roc(scores, y)
        block["auc"] = curve.auc
        block["roc"] = [list(p) for p in curve.points]
    else:
        block["auc"] = None
        block["roc"] = None
    edges, counts = error_histogram(scores, y, n_bins)
    block["error_histogram"] = {"edges": edges.tolist(), "counts": counts.tolist()}
    return block


def _feature_stats(features):
    out = {"descriptive": {k: asdict(v) for k, v in descriptive_stats(features).items()}}
    for coord in ("mu", "sigma"):
        x1 = [getattr(fv, coord) for fv in features if fv.label == SWD]
        x0 = [getattr(fv, coord) for fv in features if fv.label == NSWD]
        es = effect_size(x1, x0)
        out[f"effect_size_{coord}"] = asdict(es)
    return out


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)  # "inf" / "-inf" for ROC endpoint thresholds
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def eval_report(splits, threshold=0.5, n_bins=20, post=None, pre=None):
    """Assemble the evaluation document.

    ``splits`` maps a split name to ``(scores, labels)``.  ``post`` and
    ``pre`` are optional labeled feature lists (after and before the MA
    residual) for the descriptive statistics and effect sizes.
    """
    report = {"threshold": threshold, "splits": {}}
    for name, (scores, labels) in splits.items():
        report["splits"][name] = _split_block(scores, labels, threshold, n_bins)
    if post is not None:
        report["features_after_ma"] = _feature_stats(post)
    if pre is not None:
        report["features_before_ma"] = _feature_stats(pre)
    return _jsonable(report)
