"""Deterministic random number streams.

Every stochastic operation in sarlib draws from a :class:`RandomStream`, a
counter-based SplitMix64 generator (Steele, Lea & Flood 2014): draw ``i`` of a
stream with seed ``s`` is ``mix64(s + GAMMA * (i + 1))`` where ``GAMMA`` is the
64-bit golden-ratio increment and ``mix64`` is the SplitMix64 finalizer.
Because each output depends only on ``(seed, i)``, bulk generation is
vectorized and streams can be resumed at any point; there is no global state.

Substreams: realization ``r`` of a master seed uses ``master_seed XOR r``
(see :func:`substream`); the finalizer's avalanche makes neighbouring seeds
statistically independent, which is exactly what SplitMix64 was designed for.
Composite keys (e.g. a sweep cell) are folded with :func:`derive_seed`.

Standard-normal draws use the Box-Muller transform of consecutive uniform
pairs, so a stream of normals is a pure function of the underlying uniform
stream. An odd-length request still consumes a whole pair.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15

_U64_GAMMA = np.uint64(GAMMA)
_U64_M1 = np.uint64(0xBF58476D1CE4E5B9)
_U64_M2 = np.uint64(0x94D049BB133111EB)
_TWO_NEG53 = 2.0 ** -53


def mix64(z: int) -> int:
    """SplitMix64 finalizer for a single 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _U64_M1
    z = z ^ (z >> np.uint64(27))
    z = z * _U64_M2
    return z ^ (z >> np.uint64(31))


def derive_seed(master_seed: int, *components: int) -> int:
    """Fold integer components into a master seed to get an independent seed.

    Deterministic and order-sensitive; used to key sweep cells so that every
    (tau, N, realization) triple owns its own substream regardless of worker
    scheduling.
    """
    h = master_seed & MASK64
    for comp in components:
        h = mix64((h + GAMMA) ^ mix64(comp & MASK64))
    return h


def float_key(x: float) -> int:
    """Bit pattern of a float, usable as a derive_seed component."""
    return int(np.float64(x).view(np.uint64))


def substream(master_seed: int, r: int) -> "RandomStream":
    """Stream for realization ``r``: seed is ``master_seed XOR r``."""
    return RandomStream((master_seed ^ r) & MASK64)


class RandomStream:
    """Resumable counter-based SplitMix64 stream."""

    __slots__ = ("seed", "_index")

    def __init__(self, seed: int, index: int = 0):
        self.seed = seed & MASK64
        self._index = index

    @property
    def index(self) -> int:
        """Number of 64-bit draws consumed so far."""
        return self._index

    def _raw(self, count: int) -> np.ndarray:
        idx = np.arange(self._index + 1, self._index + count + 1, dtype=np.uint64)
        self._index += count
        states = np.uint64(self.seed) + _U64_GAMMA * idx
        return _mix64_vec(states)

    def uniforms(self, count: int) -> np.ndarray:
        """``count`` i.i.d. draws from U[0, 1), 53-bit resolution."""
        if count < 1:
            raise ValueError("count must be >= 1")
        return (self._raw(count) >> np.uint64(11)).astype(np.float64) * _TWO_NEG53

    def normals(self, count: int) -> np.ndarray:
        """``count`` i.i.d. standard-normal draws (Box-Muller pairs).

        Draw 2j feeds the radius (mapped to (0, 1] so log never sees 0)
        and draw 2j+1 the angle.
        """
        if count < 1:
            raise ValueError("count must be >= 1")
        pairs = (count + 1) // 2
        raw = self._raw(2 * pairs) >> np.uint64(11)
        u1 = (raw[0::2].astype(np.float64) + 1.0) * _TWO_NEG53
        u2 = raw[1::2].astype(np.float64) * _TWO_NEG53
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * math.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:count]

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates permutation of range(n), consuming n-1 uniforms."""
        idx = np.arange(n)
        if n < 2:
            return idx
        u = self.uniforms(n - 1)
        for k, i in enumerate(range(n - 1, 0, -1)):
            j = int(u[k] * (i + 1))
            if j > i:  # guard the u == 1-ulp edge
                j = i
            idx[i], idx[j] = idx[j], idx[i]
        return idx

    def choose(self, n: int, k: int) -> np.ndarray:
        """k distinct indices from range(n), uniform without replacement."""
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        if k == 0:
            return np.empty(0, dtype=int)
        idx = np.arange(n)
        u = self.uniforms(k)
        for t in range(k):
            j = t + int(u[t] * (n - t))
            if j >= n:
                j = n - 1
            idx[t], idx[j] = idx[j], idx[t]
        return np.sort(idx[:k])

    def random_orthogonal(self, dim: int) -> np.ndarray:
        """Haar-distributed orthogonal matrix (QR with sign-fixed diagonal)."""
        a = self.normals(dim * dim).reshape(dim, dim)
        q, r = np.linalg.qr(a)
        signs = np.sign(np.diag(r))
        signs[signs == 0] = 1.0
        return q * signs
