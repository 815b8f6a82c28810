"""Counter-based random streams.

A stream is a single 64-bit key; draw ``j`` of a stream is obtained by hashing
``key + (j+1)*GAMMA`` with the SplitMix64 finalizer. Random access by counter
means a consumer can be handed (stream, offset) coordinates instead of mutable
generator state, which is what makes simulation output independent of worker
scheduling: row ``r`` of a dataset always reads the same counters of the same
derived stream no matter which thread computes it.

Streams are value-typed and splittable, per the concurrency contract of the
stable-sampling module. ``split`` derives a child key through a second
finalizer pass with a distinct odd constant, so child draw sequences never
alias the parent's.

NumPy generators were deliberately not used here: their normal sampler
consumes a data-dependent number of words (ziggurat rejection), which makes
fixed per-row counter layouts impossible. Box-Muller from two counters per
normal keeps the layout static. Statistical quality of the SplitMix64 sequence
is validated empirically by the distribution gates in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15  # golden-ratio increment, draw-counter stride
SPLIT = 0xD1B54A32D192ED03  # distinct odd constant for stream derivation
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a (masked) Python integer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int = 0) -> int:
    """Root key for (seed, stream-id)."""
    return split_key(mix64((seed & _MASK) + GAMMA), stream)


def split_key(key: int, index: int) -> int:
    """Child-stream key; index may be any nonnegative integer (e.g. a row id)."""
    return mix64((key + mix64(((index & _MASK) + 1) * SPLIT)) & _MASK)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps mod 2^64, matching the masked scalar version
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def raw_block(key: int, start: int, count: int) -> np.ndarray:
    """uint64 hash values for counters start .. start+count-1 of a stream."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    return _mix64_np(np.uint64(key) + idx * np.uint64(GAMMA))


def uniform_block(key: int, start: int, count: int) -> np.ndarray:
    """Doubles in the open interval (0,1), one per counter.

    Mapping keeps 53 bits and centers on the grid: u = ((raw >> 11) + 0.5)/2^53,
    so 0.0 and 1.0 are unreachable and downstream log/tan transforms stay finite.
    """
    r = raw_block(key, start, count)
    return ((r >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


@dataclass(frozen=True)
class RandomStream:
    """Immutable handle on one counter-based stream."""

    key: int

    @classmethod
    def from_seed(cls, seed: int, stream: int = 0) -> "RandomStream":
        return cls(stream_key(seed, stream))

    def split(self, index: int) -> "RandomStream":
        return RandomStream(split_key(self.key, index))

    def uniforms(self, count: int, start: int = 0) -> np.ndarray:
        """count uniforms in (0,1) from counters start .. start+count-1."""
        return uniform_block(self.key, start, count)

    def normals(self, count: int, start: int = 0) -> np.ndarray:
        """count standard normals; normal i consumes counters start+2i, start+2i+1."""
        u = uniform_block(self.key, start, 2 * count)
        return np.sqrt(-2.0 * np.log(u[0::2])) * np.cos(2.0 * np.pi * u[1::2])
