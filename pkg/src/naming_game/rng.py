"""Counter-based random streams.

Every random number used by the simulators is a pure function of a key and a
counter, so a draw can be recomputed from ``(seed, stream, index)`` alone. The
block function is Philox4x64-10 from Random123, the same generator
as :class:`numpy.random.Philox`; seeds for replicates are derived with the
splitmix64 finalizer.

Counter layout for one block: ``(index, lane, 0, stream_tag)`` with key
``(seed, 0)``. For edge streams the lane is the edge index; other streams use
lane 0.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1

# stream tags (fourth counter word)
STREAM_EDGE = 0
STREAM_GLOBAL = 1
STREAM_LUMPED = 2
STREAM_INTERFACE = 3
STREAM_BIRTH_DEATH = 4
STREAM_LATTICE = 5

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S12 = np.uint64(12)
_TWO_M52 = 2.0**-52


@njit(inline="always")
def _mulhilo(a, b):
    lo = a * b
    a_lo = a & _LO32
    a_hi = a >> _S32
    b_lo = b & _LO32
    b_hi = b >> _S32
    t = a_lo * b_lo
    u = a_hi * b_lo + (t >> _S32)
    w1 = a_lo * b_hi + (u & _LO32)
    hi = a_hi * b_hi + (u >> _S32) + (w1 >> _S32)
    return hi, lo


@njit(cache=True, nogil=True)
def philox4x64(c0, c1, c2, c3, k0, k1):
    """Philox4x64 with 10 rounds; all arguments are uint64."""
    for i in range(10):
        if i > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@njit(inline="always")
def to_open_unit(x):
    # 52 high bits shifted by half a step; with 53 bits the top value rounds to 1.0
    return (float(x >> _S12) + 0.5) * _TWO_M52


@njit(cache=True, nogil=True)
def block(seed, stream, lane, index):
    return philox4x64(
        np.uint64(index), np.uint64(lane), np.uint64(0), np.uint64(stream),
        np.uint64(seed), np.uint64(0),
    )


@njit(cache=True)
def _gap_and_mark(seed, stream, lane, index):
    w = block(seed, stream, lane, index)
    return -math.log(to_open_unit(w[0])), to_open_unit(w[1])


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, cell: int = 0, replicate: int = 0) -> int:
    """Mix ``(master, cell, replicate)`` into one 64-bit stream seed."""
    h = splitmix64(master & MASK64)
    h = splitmix64(h ^ (cell & MASK64))
    return splitmix64(h ^ (replicate & MASK64))


def replicate_seeds(master: int, cell: int, n: int) -> np.ndarray:
    return np.array([derive_seed(master, cell, i) for i in range(n)], dtype=np.uint64)


class RandomSource:
    """Keyed draws of the graphical representation.

    ``edge_draw(e, n)`` returns the n-th (exponential gap, uniform mark) pair of
    edge ``e``: the inter-arrival time ``T_n - T_{n-1}`` of that edge's rate-one
    Poisson clock and the mark ``U_n`` deciding the outcome. ``global_draw(n)``
    is the superposition stream used by the event loop: an exponential(1) gap
    (divide by the edge count) and a uniform used to pick the edge.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64

    def edge_draw(self, edge: int, n: int) -> tuple[float, float]:
        return _gap_and_mark(np.uint64(self.seed), STREAM_EDGE, edge, n)

    def global_draw(self, n: int) -> tuple[float, float]:
        return _gap_and_mark(np.uint64(self.seed), STREAM_GLOBAL, 0, n)

    def raw(self, stream: int, lane: int, index: int) -> tuple[int, int, int, int]:
        return tuple(int(w) for w in block(np.uint64(self.seed), stream, lane, index))
