"""Seeded random streams.

Two kinds of streams are handed out, both keyed by ``(seed, replica,
substream)`` so that a replica's randomness never depends on which worker
runs it or on how replicas are batched:

* :func:`replica_rng` returns a numpy ``Generator`` (used for the chi and
  Gaussian entries of the tridiagonal model).
* :func:`replica_key` returns a 64-bit key for the counter-based normal
  stream :func:`counter_normal`, which the diffusion kernels index by grid
  step.  The stream is SplitMix64 evaluated at ``key + counter * gamma``,
  so any element can be produced without generating its predecessors.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO = np.uint64(2)
_INV53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi


def _check_seed(seed) -> int:
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return seed


def seed_sequence(seed, replica=0, substream=0) -> np.random.SeedSequence:
    return np.random.SeedSequence(_check_seed(seed), spawn_key=(int(replica), int(substream)))


def replica_rng(seed, replica=0, substream=0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, replica, substream)))


def replica_key(seed, replica=0, substream=0) -> np.uint64:
    return seed_sequence(seed, replica, substream).generate_state(1, dtype=np.uint64)[0]


def replica_keys(seed, start, stop, substream=0) -> np.ndarray:
    return np.array([replica_key(seed, i, substream) for i in range(start, stop)], dtype=np.uint64)


@njit
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit
def counter_normal_scalar(key, counter):
    """Standard normal number ``counter`` of the stream ``key`` (Box-Muller)."""
    c = np.uint64(counter)
    a = _mix64(key + (_TWO * c + _ONE) * _GAMMA)
    b = _mix64(key + (_TWO * c + _TWO) * _GAMMA)
    u1 = (float(a >> _S11) + 1.0) * _INV53
    u2 = float(b >> _S11) * _INV53
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


def counter_normal(keys, counters) -> np.ndarray:
    """Vectorised :func:`counter_normal_scalar` over broadcast ``keys`` and ``counters``."""
    keys, c = np.broadcast_arrays(np.asarray(keys, dtype=np.uint64),
                                  np.asarray(counters, dtype=np.uint64))
    shape = keys.shape
    # 1-d arrays: uint64 array arithmetic wraps silently, scalar arithmetic warns
    keys = keys.reshape(-1)
    c = c.reshape(-1)
    a = _mix64_np(keys + (_TWO * c + _ONE) * _GAMMA)
    b = _mix64_np(keys + (_TWO * c + _TWO) * _GAMMA)
    u1 = ((a >> _S11).astype(np.float64) + 1.0) * _INV53
    u2 = (b >> _S11).astype(np.float64) * _INV53
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)
    return z.reshape(shape)


def _mix64_np(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)
