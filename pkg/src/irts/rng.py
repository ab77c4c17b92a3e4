"""Self-contained deterministic RNG used for every stochastic choice.

Shuffles, subset draws and dropout masks all go through SplitMix64 so that
outputs are byte-stable across platforms and numpy releases.  Per-sample
streams are derived from (seed, index) so parallel and serial runs agree.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Tiny counter-based generator; good enough for index shuffles and masks."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix(self._state)

    def uniform(self) -> float:
        # 53 high bits -> double in [0, 1)
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(n)], dtype=np.float64)

    def randint(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection (bound >= 1)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (_MASK64 + 1) - (_MASK64 + 1) % bound
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]

    def choice(self, n: int, k: int) -> list[int]:
        """k distinct indices drawn from range(n), in draw order."""
        if k > n:
            raise ValueError("cannot draw more indices than available")
        idx = list(range(n))
        self.shuffle(idx)
        return idx[:k]

    def normal(self, shape: tuple[int, ...] | int) -> np.ndarray:
        """Box-Muller standard normals."""
        if isinstance(shape, int):
            shape = (shape,)
        n = int(np.prod(shape)) if shape else 1
        m = (n + 1) // 2
        u1 = np.maximum(self.uniforms(m), 1e-300)
        u2 = self.uniforms(m)
        r = np.sqrt(-2.0 * np.log(u1))
        out = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])
        return out[:n].reshape(shape)


def derive(seed: int, *indices: int) -> int:
    """Derive a child seed from (seed, *indices); stable and collision-resistant
    enough for per-sample streams."""
    z = seed & _MASK64
    for ix in indices:
        z = _mix((z ^ (ix & _MASK64)) * 0xD1342543DE82EF95 & _MASK64)
    return z
