"""Counter-based random number streams.

Every observation in this package is addressed, not drawn: the t-th raw
64-bit word of arm i under seed s is ``splitmix64_fin(stream_key(s, i) +
(t+1) * GAMMA)``, a pure function of (s, i, t).  This is what lets the
boundary-crossing oracles replay exactly the sample paths the engine saw,
regardless of sampling order, and what makes replications embarrassingly
parallel.

The same integer recipe is implemented three times on purpose: scalar
Python (here), vectorized numpy (here), and C (in the compiled kernel).
All three are bit-identical; tests enforce it.
"""

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_SEED_SALT = 0x5851F42D4C957F2D

# Exactly representable; maps a 53-bit mantissa into the open interval (0, 1).
U01_SCALE = 2.0 ** -53


def splitmix64_fin(z: int) -> int:
    """Finalizer of the splitmix64 generator (bijective on 64-bit words)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return (z ^ (z >> 31)) & MASK64


def stream_key(seed: int, arm: int) -> int:
    """64-bit key of the (seed, arm) stream."""
    h = splitmix64_fin((seed & MASK64) ^ _SEED_SALT)
    return splitmix64_fin((h + ((arm + 1) * GAMMA)) & MASK64)


def raw_u64(key: int, t: int) -> int:
    """The t-th (t >= 0) raw word of the stream with the given key."""
    return splitmix64_fin((key + ((t + 1) * GAMMA)) & MASK64)


def uniform(key: int, t: int) -> float:
    """The t-th uniform double, strictly inside (0, 1)."""
    return ((raw_u64(key, t) >> 11) + 0.5) * U01_SCALE


def uniform_block(key: int, t0: int, n: int) -> np.ndarray:
    """Uniforms for counters t0 .. t0+n-1, bit-identical to `uniform`."""
    with np.errstate(over="ignore"):
        t = np.arange(t0 + 1, t0 + n + 1, dtype=np.uint64)
        z = np.uint64(key) + t * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * U01_SCALE


def hash64(*parts) -> int:
    """Stable 64-bit hash of heterogeneous parts (seed derivation).

    Uses blake2b over a canonical byte encoding, so results are identical
    across processes, platforms, and runs (unlike Python's salted hash()).
    """
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")
