"""Counter-based random streams.

Each stream is a Philox-4x64 generator keyed by ``(seed, purpose, index)``
with its counter starting at zero, so a stream's output never depends on how
much another stream consumed or on which thread drew it. Uniforms and
normals are derived from the raw 64-bit words here (Box-Muller for normals)
instead of through a library sampler, to keep the bit pattern fixed.
"""

from __future__ import annotations

import math

import numpy as np

from . import _accel

MASK64 = (1 << 64) - 1

# purpose tags, one per logical use of randomness
T_DRAWS = 1
NOISE = 2
PERMUTATION = 3
QUERIES = 4
SAMPLES = 5


class Stream:
    def __init__(self, seed: int, purpose: int, index: int = 0):
        if not 0 <= index < (1 << 56):
            raise ValueError("stream index out of range")
        key = np.array([int(seed) & MASK64, (purpose << 56) | index], dtype=np.uint64)
        self._bits = np.random.Philox(key=key)

    def raw(self, n: int) -> np.ndarray:
        return self._bits.random_raw(n)

    def uniform(self, n: int) -> np.ndarray:
        """Doubles on ``[0, 1)`` with 53 random bits each."""
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        """Standard normals by the Box-Muller transform."""
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs)
        u1 = 1.0 - u[0::2]  # (0, 1], keeps log finite
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(2.0 * math.pi * u2)
        out[1::2] = r * np.sin(2.0 * math.pi * u2)
        return out[:n]

    def swap_indices(self, n: int) -> np.ndarray:
        """Fisher-Yates partners: entry ``i - 1`` is uniform on ``{0..i}``."""
        if n <= 1:
            return np.zeros(0, dtype=np.int64)
        span = np.arange(2, n + 1, dtype=np.float64)
        idx = np.floor(self.uniform(n - 1) * span).astype(np.int64)
        return np.minimum(idx, np.arange(1, n, dtype=np.int64))


def permutation_stream(seed: int, k: int) -> Stream:
    return Stream(seed, PERMUTATION, k)


def permute(values: np.ndarray, stream: Stream) -> np.ndarray:
    """Return a Fisher-Yates shuffled copy of ``values``."""
    out = np.array(values, copy=True)
    if out.shape[0] > 1:
        _accel.fisher_yates(out, stream.swap_indices(out.shape[0]))
    return out
