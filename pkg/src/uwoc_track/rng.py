"""Portable seeded Gaussian stream.

The raw stream is SplitMix64 (Steele, Lea & Flood): output ``i`` is the
finalizer applied to ``seed + (i + 1) * gamma`` modulo 2^64, so a whole block
is one vectorised expression.  Pairs of 53-bit uniforms on (0, 1] feed the
Box-Muller transform.  Any implementation following these rules reproduces
the sequence bit for bit, which a library generator does not promise across
versions.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


def splitmix64(state: int) -> tuple[int, int]:
    """Return ``(new_state, output)``."""
    state = (state + GAMMA) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return state, z ^ (z >> 31)


def splitmix64_block(seed: int, n: int) -> np.ndarray:
    """First ``n`` SplitMix64 outputs for ``seed`` as a uint64 array."""
    if not 0 <= seed <= _MASK:
        raise ValueError("seed must be an unsigned 64-bit integer")
    i = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + i * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, n: int) -> np.ndarray:
    """``n`` uniforms on (0, 1] from the top 53 bits of each output."""
    raw = splitmix64_block(seed, n)
    return ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53


def normals(seed: int, n: int) -> np.ndarray:
    """``n`` standard normals; Box-Muller on consecutive uniform pairs."""
    m = (n + 1) // 2
    u = uniforms(seed, 2 * m)
    rad = np.sqrt(-2.0 * np.log(u[0::2]))
    ang = 2.0 * math.pi * u[1::2]
    z = np.empty(2 * m)
    z[0::2] = rad * np.cos(ang)
    z[1::2] = rad * np.sin(ang)
    return z[:n]
