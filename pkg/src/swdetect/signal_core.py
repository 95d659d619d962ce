"""Windowing, two-sided moving averages and the MA residual.

Indices follow the centred convention: a moving average with half-window
``h`` is defined on original samples ``h .. n-h-1`` (0-based), so its
output ``k`` sits over input sample ``k + h``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal as sps

from . import LABELS
from .errors import SignalTooShortError, SwdError

DEFAULT_WINDOW_S = 20.0


def _frozen_array(values):
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise SwdError(f"expected a 1-D sample sequence, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Signal:
    """One channel of samples (microvolts) at a fixed sampling rate."""

    samples: np.ndarray
    fs: float
    channel: str = ""
    label: Optional[str] = None
    patient_id: Optional[str] = None
    id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen_array(self.samples))
        if not self.fs > 0:
            raise SwdError(f"sampling rate must be positive, got {self.fs}")
        if self.label is not None and self.label not in LABELS:
            raise SwdError(f"unknown label {self.label!r}; expected one of {LABELS}")

    def __len__(self):
        return len(self.samples)

    @property
    def duration_s(self):
        return len(self.samples) / self.fs

    def __eq__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        return (
            self.fs == other.fs
            and self.channel == other.channel
            and self.label == other.label
            and self.patient_id == other.patient_id
            and self.id == other.id
            and np.array_equal(self.samples, other.samples)
        )

    def replace_samples(self, samples):
        return Signal(samples, self.fs, self.channel, self.label, self.patient_id, self.id)


@dataclass(frozen=True)
class Window:
    parent: Signal
    start_index: int
    length_samples: int

    def __post_init__(self):
        if self.start_index < 0 or self.length_samples <= 0:
            raise SwdError("window needs start_index >= 0 and length_samples > 0")
        if self.start_index + self.length_samples > len(self.parent):
            raise SwdError(
                f"window [{self.start_index}, {self.start_index + self.length_samples}) "
                f"exceeds signal of {len(self.parent)} samples"
            )

    @property
    def duration_s(self):
        return self.length_samples / self.parent.fs

    @property
    def values(self):
        return self.parent.samples[self.start_index : self.start_index + self.length_samples]

    @property
    def source_id(self):
        return f"{self.parent.id}@{self.start_index}"

    @classmethod
    def whole(cls, signal):
        return cls(signal, 0, len(signal))


@dataclass(frozen=True)
class MaConfig:
    """Half-windows of the short (h1) and long (h2) moving averages.

    The window lengths are ``2*h1 + 1 < 2*h2 + 1``.  The defaults give a
    5-sample (~20 ms at 256 Hz) and an 85-sample (~332 ms, one 3 Hz
    period) average.
    """

    h1: int = 2
    h2: int = 42

    def __post_init__(self):
        for name in ("h1", "h2"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise SwdError(f"{name} must be a non-negative integer, got {v!r}")
        if not self.h1 < self.h2:
            raise SwdError(f"short half-window must be below long one (h1={self.h1}, h2={self.h2})")

    def check_length(self, n):
        if 2 * self.h2 + 1 > n:
            raise SwdError(f"long moving average (2*{self.h2}+1 samples) exceeds window of {n} samples")


@dataclass(frozen=True, eq=False)
class Residual:
    values: np.ndarray
    source: Window
    config: MaConfig = field(default_factory=MaConfig)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))


@dataclass(frozen=True)
class FilterConfig:
    """Pre-filter cascade applied to whole signals before windowing.

    The low-pass is a second-order Butterworth biquad (bilinear
    transform).  The optional high-pass is first order and off by
    default; it has no default cutoff and must be given explicitly.
    """

    lowpass: bool = True
    lowpass_hz: float = 30.0
    highpass: bool = False
    highpass_hz: Optional[float] = None

    def __post_init__(self):
        if self.lowpass and not self.lowpass_hz > 0:
            raise SwdError(f"low-pass cutoff must be positive, got {self.lowpass_hz}")
        if self.highpass and (self.highpass_hz is None or not self.highpass_hz > 0):
            raise SwdError("high-pass enabled without a positive cutoff")


def segment(signal, duration_s=DEFAULT_WINDOW_S, hop_s=None):
    """Tile ``signal`` with windows of ``duration_s`` every ``hop_s`` seconds.

    A trailing partial window is dropped.  ``hop_s`` defaults to the
    window duration (non-overlapping).
    """
    if hop_s is None:
        hop_s = duration_s
    if not duration_s > 0 or not hop_s > 0:
        raise SwdError("window duration and hop must be positive")
    length = int(round(duration_s * signal.fs))
    hop = int(round(hop_s * signal.fs))
    if length < 1 or hop < 1:
        raise SwdError("window or hop shorter than one sample")
    n = len(signal)
    if n < length:
        raise SignalTooShortError(
            f"signal too short: one {duration_s:g} s window needs {length} samples, "
            f"{signal.id or 'signal'} has {n}"
        )
    return [Window(signal, start, length) for start in range(0, n - length + 1, hop)]


def moving_average(values, h):
    """Two-sided moving average over ``2h+1`` samples with truncated edges.

    Returns ``len(values) - 2h`` values; no padding is applied.

    >>> moving_average([1.0, 2.0, 3.0, 4.0, 5.0], 1)
    array([2., 3., 4.])
    """
    x = np.asarray(values, dtype=np.float64)
    if int(h) != h or h < 0:
        raise SwdError(f"half-window must be a non-negative integer, got {h!r}")
    k = 2 * int(h) + 1
    if k > len(x):
        raise SwdError(f"window exceeds series: {k} samples needed, {len(x)} available")
    if h == 0:
        return x.copy()
    return sliding_window_view(x, k).sum(axis=1) / k


def residual_values(values, config):
    """``M1 - M2`` on the common valid range of the long average."""
    x = np.asarray(values, dtype=np.float64)
    config.check_length(len(x))
    m1 = moving_average(x, config.h1)
    m2 = moving_average(x, config.h2)
    trim = config.h2 - config.h1
    return m1[trim : len(m1) - trim] - m2


def ma_residual(window, config=MaConfig()):
    return Residual(residual_values(window.values, config), window, config)


def prefilter(samples, fs, config=FilterConfig()):
    """Causal filter cascade; the state starts at rest on the first sample."""
    x = np.asarray(samples, dtype=np.float64)
    nyq = fs / 2.0
    if config.lowpass:
        if not config.lowpass_hz < nyq:
            raise SwdError(f"low-pass cutoff {config.lowpass_hz} Hz is not below Nyquist ({nyq} Hz)")
        sos = sps.butter(2, config.lowpass_hz, btype="low", fs=fs, output="sos")
        x, _ = sps.sosfilt(sos, x, zi=sps.sosfilt_zi(sos) * x[0])
    if config.highpass:
        if not config.highpass_hz < nyq:
            raise SwdError(f"high-pass cutoff {config.highpass_hz} Hz is not below Nyquist ({nyq} Hz)")
        sos = sps.butter(1, config.highpass_hz, btype="high", fs=fs, output="sos")
        x, _ = sps.sosfilt(sos, x, zi=sps.sosfilt_zi(sos) * x[0])
    return x


def prefilter_signal(signal, config=FilterConfig()):
    if not (config.lowpass or config.highpass):
        return signal
    return signal.replace_samples(prefilter(signal.samples, signal.fs, config))
