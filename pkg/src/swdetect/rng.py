"""Portable seeded random streams.

All randomness in the package flows through :class:`Rng`, a PCG64
(O'Neill 2014, PCG-XSL-RR 128/64) bit generator keyed by a tuple of
non-negative integers via numpy's ``SeedSequence``.  Only the raw 53-bit
uniform double ``(next_uint64 >> 11) * 2**-53`` is taken from numpy;
normals and integer draws are derived here so that another implementation
with PCG64 + SeedSequence can reproduce every stream.

Reference outputs (first three uniforms for key ``(42,)``) are frozen in
``tests/test_rng.py`` and the README.
"""

import math

import numpy as np


class Rng:
    """Deterministic stream for one key, e.g. ``Rng(seed, instance, stream)``."""

    def __init__(self, *key):
        if not key:
            raise ValueError("Rng needs at least one key component")
        for k in key:
            if int(k) != k or k < 0:
                raise ValueError(f"key components must be non-negative integers, got {k!r}")
        self.key = tuple(int(k) for k in key)
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(self.key))))

    def random(self, size=None):
        """Uniform doubles on [0, 1)."""
        return self._gen.random(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return low + (high - low) * self.random(size)

    def normal(self, size):
        """Standard normals by the Box-Muller transform, one pair per two uniforms."""
        n = int(size)
        m = (n + 1) // 2
        u = self.random(2 * m)
        u1 = 1.0 - u[:m]  # (0, 1]
        u2 = u[m:]
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.empty(2 * m)
        z[0::2] = r * np.cos(2.0 * math.pi * u2)
        z[1::2] = r * np.sin(2.0 * math.pi * u2)
        return z[:n]

    def integer(self, n):
        """One integer uniform on ``range(n)`` (floor of a scaled uniform)."""
        return min(int(self.random() * n), n - 1)

    def permutation(self, n):
        """Fisher-Yates shuffle of ``range(n)`` driven by :meth:`random`."""
        idx = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.integer(i + 1)
            idx[i], idx[j] = idx[j], idx[i]
        return np.array(idx, dtype=np.int64)
