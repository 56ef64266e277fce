"""Per-replicate random streams usable inside numba kernels.

Every replicate owns two xoshiro256** streams, both derived from
``(master_seed, replicate_index)`` through SplitMix64:

* the *chain* stream drives holding times and merger sizes;
* the *aux* stream drives labelling coins, Type-2 races and the choice of
  merging blocks.

Splitting the two means a jump-chain path and an external-branch sample
built from the same seed share the same chain.  Derivation needs no
shared state, so replicates can be scheduled on any number of workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_AUX_SALT = np.uint64(0xD1B54A32D192ED03)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U45 = np.uint64(45)
_U5 = np.uint64(5)
_U7 = np.uint64(7)
_U9 = np.uint64(9)
_U64 = np.uint64(64)
_INV53 = 1.0 / 9007199254740992.0

MASK64 = (1 << 64) - 1


@nb.njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> _U30)) * _MIX1
    z = (z ^ (z >> _U27)) * _MIX2
    return z ^ (z >> _U31)


@nb.njit(cache=True)
def _rotl(x, k):
    return (x << k) | (x >> (_U64 - k))


@nb.njit(cache=True)
def seed_stream(state, key):
    """Fill a length-4 uint64 ``state`` from a 64-bit key (SplitMix64)."""
    x = key
    for i in range(4):
        x = x + _GOLDEN
        state[i] = _mix64(x)


@nb.njit(cache=True)
def replicate_key(master_seed, replicate_index, salt):
    return _mix64(_mix64(master_seed ^ salt) ^ replicate_index)


@nb.njit(cache=True)
def seed_replicate(chain, aux, master_seed, replicate_index):
    seed_stream(chain, replicate_key(master_seed, replicate_index, np.uint64(0)))
    seed_stream(aux, replicate_key(master_seed, replicate_index, _AUX_SALT))


@nb.njit(cache=True)
def next_u64(s):
    result = _rotl(s[1] * _U5, _U7) * _U9
    t = s[1] << _U17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], _U45)
    return result


@nb.njit(cache=True)
def uniform(s):
    """Uniform double on [0, 1) with 53 random bits."""
    return (next_u64(s) >> _U11) * _INV53


@nb.njit(cache=True)
def exponential(s):
    return -np.log1p(-uniform(s))


@nb.njit(cache=True)
def randbelow(s, m):
    """Uniform integer in [0, m) by rejection-free multiply (m small)."""
    return int(uniform(s) * m)


@dataclass(frozen=True)
class SeedSpec:
    """``(master_seed, replicate_index)`` naming one replicate's streams."""

    master_seed: int
    replicate_index: int = 0

    def streams(self) -> tuple[np.ndarray, np.ndarray]:
        chain = np.empty(4, dtype=np.uint64)
        aux = np.empty(4, dtype=np.uint64)
        seed_replicate(chain, aux, np.uint64(self.master_seed & MASK64),
                       np.uint64(self.replicate_index & MASK64))
        return chain, aux


def as_u64(x: int) -> np.uint64:
    return np.uint64(int(x) & MASK64)
