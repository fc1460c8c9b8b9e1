"""Deterministic counter-based random number generation.

All state is 64-bit integer arithmetic, so a given seed produces the same
stream on every platform and Python build.  Streams are derived, not
advanced: stream ``i`` of a seed is independent of streams ``0..i-1``,
which lets batch operations hand out one stream per item without
coordination.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_STREAM_SALT = 0xD6E8FEB86659FD93


def mix64(x: int) -> int:
    """Finalizing bijective mixer over 64-bit integers."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def stream_key(seed: int, index: int) -> int:
    """Derive the key of stream `index` under `seed`."""
    base = mix64((seed & _MASK64) + _GOLDEN)
    return mix64(base ^ (((index & _MASK64) + 1) * _STREAM_SALT & _MASK64))


def u64_at(key: int, counter: int) -> int:
    """The `counter`-th raw 64-bit value of the stream with `key`."""
    return mix64((key + ((counter + 1) * _GOLDEN & _MASK64)) & _MASK64)


def float_at(key: int, counter: int) -> float:
    """The `counter`-th uniform float in [0, 1) of the stream with `key`."""
    return (u64_at(key, counter) >> 11) * 2.0**-53


class StreamRng:
    """Sequential view over one counter-based stream."""

    def __init__(self, key: int):
        self._key = key & _MASK64
        self._counter = 0

    @classmethod
    def from_seed(cls, seed: int, index: int = 0) -> "StreamRng":
        return cls(stream_key(seed, index))

    def next_u64(self) -> int:
        v = u64_at(self._key, self._counter)
        self._counter += 1
        return v

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) via 53-bit floats; n must be small."""
        return int(self.next_float() * n)

    def choice(self, items):
        return items[self.next_below(len(items))]

    def shuffle(self, items: list) -> None:
        # Fisher-Yates with the deterministic stream.
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]


def mix64_np(x: np.ndarray) -> np.ndarray:
    """Vectorized `mix64` over a uint64 array; bit-identical to the scalar."""
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MIX1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MIX2)
    x ^= x >> np.uint64(31)
    return x


def stream_keys_np(seed: int, n: int) -> np.ndarray:
    """Keys of streams 0..n-1 under `seed`, as a uint64 array."""
    base = np.uint64(mix64((seed & _MASK64) + _GOLDEN))
    idx = np.arange(1, n + 1, dtype=np.uint64)
    return mix64_np(base ^ (idx * np.uint64(_STREAM_SALT)))


def floats_at_np(keys: np.ndarray, counter: int) -> np.ndarray:
    """Uniform [0, 1) floats at one counter position across many streams."""
    step = np.uint64((counter + 1) * _GOLDEN & _MASK64)
    v = mix64_np(keys + step)
    return (v >> np.uint64(11)).astype(np.float64) * 2.0**-53
