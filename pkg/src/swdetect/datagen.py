"""Seeded synthetic EEG windows: 3 Hz spike-and-wave bursts vs. background.

Seeding scheme
--------------
Every instance draws from independent :class:`~swdetect.rng.Rng`
streams keyed ``(cfg.seed, instance_seed, stream)`` with stream 0 the
background noise, 1 the SWD burst and 2 the artifact.  A SWD window and
a background window with the same instance seed therefore share their
noise, so ``gen_swd(cfg, s) - burst == gen_background(cfg', s)`` when
``cfg'`` has ``artifact_prob = 0``.  In :func:`gen_corpus` the ``i``-th
SWD signal uses instance seed ``2*i`` and the ``i``-th nSWD signal
``2*i + 1``.

None of the waveform parameters are physiological measurements; they are
tuned so the raw (mu, sigma) classes overlap while the residual sigma
separates them.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from . import NSWD, SWD
from .errors import SwdError
from .rng import Rng
from .signal_core import Signal

STREAM_NOISE, STREAM_BURST, STREAM_ARTIFACT = 0, 1, 2

# Corner frequencies (Hz) of the parallel first-order low-pass bank whose
# equally weighted sum approximates a 1/f spectrum between them.
PINK_CORNERS_HZ = (0.05, 0.2, 0.8, 3.2, 12.8)
NOISE_CLIP = 5.0
ARTIFACT_KINDS = ("pop", "blink", "muscle")
CHANNELS = ("Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "T3", "C3", "Cz", "C4",
            "T4", "T5", "P3", "Pz", "P4", "T6", "O1", "O2", "Oz", "FT10", "FT9")


@dataclass(frozen=True)
class GenConfig:
    seed: int = 42
    fs: float = 256.0
    duration_s: float = 20.0
    n_per_class: int = 390
    swd_rate_hz: float = 3.0
    spike_amp_uv: float = 300.0
    wave_amp_uv: float = 150.0
    background_amp_uv: float = 30.0
    artifact_prob: float = 0.3
    jitter: float = 0.1

    def __post_init__(self):
        if int(self.seed) != self.seed or self.seed < 0:
            raise SwdError(f"seed must be a non-negative integer, got {self.seed}")
        if not (self.fs > 0 and self.duration_s > 0 and self.swd_rate_hz > 0):
            raise SwdError("fs, duration_s and swd_rate_hz must be positive")
        if self.n_per_class < 1:
            raise SwdError(f"n_per_class must be >= 1, got {self.n_per_class}")
        if not (self.spike_amp_uv > 0 and self.wave_amp_uv > 0 and self.background_amp_uv >= 0):
            raise SwdError("amplitudes must be positive (background may be 0)")
        if not 0.0 <= self.artifact_prob <= 1.0:
            raise SwdError(f"artifact_prob must lie in [0, 1], got {self.artifact_prob}")
        if not 0.0 <= self.jitter < 1.0:
            raise SwdError(f"jitter must lie in [0, 1), got {self.jitter}")

    @property
    def n_samples(self):
        return int(round(self.fs * self.duration_s))

    @property
    def amplitude_bound(self):
        return self.spike_amp_uv + self.wave_amp_uv + 6.0 * self.background_amp_uv


def _jittered(rng, value, jitter):
    return value * (1.0 + jitter * rng.uniform(-1.0, 1.0))


def background_noise(cfg, instance_seed):
    """1/f-like noise whose stationary standard deviation is background_amp_uv.

    Each band is a unit-variance AR(1) process started in its stationary
    state, and the sum is scaled by the theoretical (not the sample)
    standard deviation.  The slowest bands span only a few cycles per
    20 s window, so short-window variance fluctuates from instance to
    instance while long windows converge to the nominal amplitude.
    """
    n = cfg.n_samples
    if cfg.background_amp_uv == 0:
        return np.zeros(n)
    rng = Rng(cfg.seed, instance_seed, STREAM_NOISE)
    amp = _jittered(rng, cfg.background_amp_uv, cfg.jitter)
    k = len(PINK_CORNERS_HZ)
    white = rng.normal(k * (n + 1)).reshape(k, n + 1)
    x = np.zeros(n)
    for corner, w in zip(PINK_CORNERS_HZ, white):
        a = math.exp(-2.0 * math.pi * corner / cfg.fs)
        band, _ = sps.lfilter([math.sqrt(1.0 - a * a)], [1.0, -a], w[1:], zi=[a * w[0]])
        x += band
    x /= math.sqrt(k)
    return amp * np.clip(x, -NOISE_CLIP, NOISE_CLIP)


def swd_burst(cfg, instance_seed):
    """Noise-free burst waveform and its ``(start, stop)`` sample range."""
    rng = Rng(cfg.seed, instance_seed, STREAM_BURST)
    n, fs = cfg.n_samples, cfg.fs
    frac = rng.uniform(0.3, 0.8)
    length = int(round(frac * n))
    start = rng.integer(n - length + 1)
    stop = start + length
    x = np.zeros(n)
    t0 = float(start)
    while True:
        period = fs / _jittered(rng, cfg.swd_rate_hz, cfg.jitter)
        spike_w = rng.uniform(0.020, 0.070) * fs
        wave_w = rng.uniform(0.200, 0.300) * fs
        spike_a = _jittered(rng, cfg.spike_amp_uv, cfg.jitter)
        wave_a = _jittered(rng, cfg.wave_amp_uv, cfg.jitter)
        if t0 + spike_w + wave_w > stop:
            break
        i0, i1 = int(math.ceil(t0)), int(t0 + spike_w)
        i = np.arange(i0, i1 + 1)
        # biphasic spike: one full sine period, sharp negative phase first
        x[i] -= spike_a * np.sin(2.0 * math.pi * (i - t0) / spike_w)
        w0 = t0 + spike_w
        j = np.arange(int(math.ceil(w0)), int(w0 + wave_w) + 1)
        j = j[j < stop]
        x[j] += wave_a * np.sin(math.pi * (j - w0) / wave_w)
        t0 += period
    return x, (start, stop)


def _artifact(cfg, instance_seed):
    n, fs = cfg.n_samples, cfg.fs
    rng = Rng(cfg.seed, instance_seed, STREAM_ARTIFACT)
    x = np.zeros(n)
    if not rng.random() < cfg.artifact_prob:
        return x, None
    kind = ARTIFACT_KINDS[rng.integer(len(ARTIFACT_KINDS))]
    bg = max(cfg.background_amp_uv, 1.0)
    t = np.arange(n)
    if kind == "pop":
        at = rng.integer(n)
        amp = rng.uniform(4.0, 10.0) * bg * (1 if rng.random() < 0.5 else -1)
        tau = rng.uniform(2.0, 6.0) * fs
        tail = t >= at
        x[tail] = amp * np.exp(-(t[tail] - at) / tau)
    elif kind == "blink":
        for _ in range(1 + rng.integer(3)):
            width = rng.uniform(0.2, 0.4) * fs
            at = rng.uniform(0, n - width)
            amp = rng.uniform(3.0, 5.0) * bg
            k = (t >= at) & (t <= at + width)
            x[k] += amp * np.sin(math.pi * (t[k] - at) / width)
    else:
        width = int(rng.uniform(0.5, 2.0) * fs)
        at = rng.integer(n - width + 1)
        amp = rng.uniform(1.0, 2.0) * bg
        b, a = sps.butter(2, [20.0, min(60.0, 0.45 * fs)], btype="band", fs=fs)
        burst = sps.lfilter(b, a, rng.normal(width))
        burst *= amp / max(burst.std(), 1e-12) * np.hanning(width)
        x[at : at + width] += burst
    return x, kind


def _finish(cfg, x):
    b = cfg.amplitude_bound
    return np.clip(x, -b, b)


def _channel(instance_seed):
    return CHANNELS[instance_seed % len(CHANNELS)]


def gen_swd(cfg, instance_seed, id=None):
    burst, _ = swd_burst(cfg, instance_seed)
    x = _finish(cfg, background_noise(cfg, instance_seed) + burst)
    return Signal(x, cfg.fs, _channel(instance_seed), SWD, "synthetic", id or f"swd-{instance_seed}")


def gen_background(cfg, instance_seed, id=None):
    art, _ = _artifact(cfg, instance_seed)
    x = _finish(cfg, background_noise(cfg, instance_seed) + art)
    return Signal(x, cfg.fs, _channel(instance_seed), NSWD, "synthetic", id or f"nswd-{instance_seed}")


def gen_corpus(cfg=GenConfig()):
    """``n_per_class`` SWD signals followed by ``n_per_class`` nSWD signals."""
    width = max(4, len(str(cfg.n_per_class - 1)))
    swd = [gen_swd(cfg, 2 * i, f"swd-{i:0{width}d}") for i in range(cfg.n_per_class)]
    nswd = [gen_background(cfg, 2 * i + 1, f"nswd-{i:0{width}d}") for i in range(cfg.n_per_class)]
    return swd + nswd
