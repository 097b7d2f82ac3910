"""Counter-based splitmix64 pseudo-random numbers.

Every draw is a pure function of (seed, counter) in 64-bit integer
arithmetic, so the compiled and pure-python kernels, and any number of
parallel trials, produce identical streams with no shared state.
"""

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def splitmix64(seed: int, k: int) -> int:
    """Return the k-th 64-bit word of the stream identified by ``seed``."""
    z = (seed + (k + 1) * _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def uniform(seed: int, k: int) -> float:
    """Uniform double in [0, 1): the k-th draw of the stream."""
    return (splitmix64(seed, k) >> 11) * _INV_2_53


def uniform_array(seed: int, n: int, start: int = 0) -> np.ndarray:
    """Vectorized ``uniform(seed, start), ..., uniform(seed, start+n-1)``."""
    k = np.arange(start + 1, start + n + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK) + k * np.uint64(_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return (z >> np.uint64(11)) * _INV_2_53


def stream_seed(master: int, index: int) -> int:
    """Seed of the derived stream for one trial: master XOR trial index."""
    return (master ^ index) & _MASK
