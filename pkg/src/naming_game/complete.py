"""The naming game on the complete graph K_N, lumped to type counts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numba import njit
from scipy.sparse.linalg import spsolve

from .engine import SimOutcome, _KINDS
from .estimate import EstimateWithCI
from .model import FitnessParams, derive
from .rng import STREAM_BIRTH_DEATH, STREAM_LUMPED, philox4x64, replicate_seeds, to_open_unit

EXACT_CAP = 60


@dataclass(frozen=True, order=True)
class CountState:
    n_A: int
    n_B: int
    n_AB: int

    def __post_init__(self):
        if min(self.n_A, self.n_B, self.n_AB) < 0:
            raise ValueError(f"negative count in {self}")

    @property
    def N(self) -> int:
        return self.n_A + self.n_B + self.n_AB


def _moves(probs):
    """(dA, dB, dAB, pair kind, probability); pair kinds: 0 A-B, 1 A-AB, 2 B-AB, 3 AB-AB."""
    return (
        (0, -1, 1, 0, probs.p_AB),
        (-1, 0, 1, 0, probs.p_BA),
        (1, 0, -1, 1, 1 - probs.q_B),
        (-1, 0, 1, 1, probs.q_B),
        (0, 1, -1, 2, 1 - probs.q_A),
        (0, -1, 1, 2, probs.q_A),
        (2, 0, -2, 3, probs.p_AB),
        (0, 2, -2, 3, probs.p_BA),
    )


def _pairs(a, b, c):
    return (a * b, a * c, b * c, c * (c - 1) // 2)


def lumped_rates(s: CountState, params: FitnessParams) -> list[tuple[CountState, float]]:
    """Outgoing transitions of the count chain, equal targets merged."""
    pairs = _pairs(s.n_A, s.n_B, s.n_AB)
    out: dict[CountState, float] = {}
    for da, db, dc, kind, p in _moves(derive(params)):
        rate = pairs[kind] * p
        if rate > 0:
            t = CountState(s.n_A + da, s.n_B + db, s.n_AB + dc)
            out[t] = out.get(t, 0.0) + rate
    return list(out.items())


def _index(N):
    states = [CountState(a, b, N - a - b) for a in range(N + 1) for b in range(N + 1 - a)]
    return states, {s: i for i, s in enumerate(states)}


def exact_absorption(N: int, params: FitnessParams, cap: int = EXACT_CAP) -> dict[CountState, float]:
    """Probability of reaching all-A from every state of the count chain on K_N."""
    if N < 2:
        raise ValueError("N must be at least 2")
    if N > cap:
        raise ValueError(f"N={N} exceeds the exact-solve cap {cap}; use simulate_lumped instead")
    states, idx = _index(N)
    rows, cols, vals = [], [], []
    rhs = np.zeros(len(states))
    for i, s in enumerate(states):
        out = lumped_rates(s, params)
        if not out:
            rows.append(i)
            cols.append(i)
            vals.append(1.0)
            rhs[i] = 1.0 if s.n_A == N else 0.0
            continue
        total = sum(r for _, r in out)
        rows.append(i)
        cols.append(i)
        vals.append(1.0)
        for t, r in out:
            rows.append(i)
            cols.append(idx[t])
            vals.append(-r / total)
    m = sp.csr_matrix((vals, (rows, cols)), shape=(len(states),) * 2)
    p = spsolve(m.tocsc(), rhs)
    resid = np.abs(m @ p - rhs).max()
    if resid > 1e-10:
        raise RuntimeError(f"absorption solve residual {resid:.3g}")
    p = np.clip(p, 0.0, 1.0)
    return {s: float(p[i]) for i, s in enumerate(states)}


# -- Monte Carlo on the count chain -------------------------------------------

@njit(inline="always")
def _u(seed, stream, k, j):
    w = philox4x64(np.uint64(k), np.uint64(0), np.uint64(0), np.uint64(stream),
                   np.uint64(seed), np.uint64(0))
    return to_open_unit(w[j])


@njit(cache=True, nogil=True)
def _lumped_kernel(N, a, b, c, pr, seed, max_events, stop_at_collision):
    # pr: the 8 move probabilities in _moves order
    t = 0.0
    k = 0
    collided = False
    jumps = 0  # changes of n_AB before the first collision
    rates = np.empty(8)
    while a != N and b != N and k < max_events:
        ab = a * b
        ac = a * c
        bc = b * c
        cc = c * (c - 1) // 2
        rates[0] = ab * pr[0]
        rates[1] = ab * pr[1]
        rates[2] = ac * pr[2]
        rates[3] = ac * pr[3]
        rates[4] = bc * pr[4]
        rates[5] = bc * pr[5]
        rates[6] = cc * pr[6]
        rates[7] = cc * pr[7]
        total = rates.sum()
        t += -np.log(_u(seed, STREAM_LUMPED, k, 0)) / total
        x = _u(seed, STREAM_LUMPED, k, 1) * total
        j = 0
        while j < 7 and x >= rates[j]:
            x -= rates[j]
            j += 1
        while rates[j] == 0.0:  # guard against rounding into an empty slot
            j -= 1
        k += 1
        if j >= 6:
            collided = True
        elif not collided:
            jumps += 1
        if j == 0:
            b -= 1
            c += 1
        elif j == 1:
            a -= 1
            c += 1
        elif j == 2:
            a += 1
            c -= 1
        elif j == 3:
            a -= 1
            c += 1
        elif j == 4:
            b += 1
            c -= 1
        elif j == 5:
            b -= 1
            c += 1
        elif j == 6:
            a += 2
            c -= 2
        else:
            b += 2
            c -= 2
        if collided and stop_at_collision:
            break
    if a == N:
        kind = 0
    elif b == N:
        kind = 1
    else:
        kind = 2
    return kind, t, k, collided, jumps, a, b


@njit(cache=True, nogil=True)
def _lumped_batch(N, a, b, c, pr, seeds, max_events, stop_at_collision):
    m = seeds.size
    kinds = np.empty(m, dtype=np.int64)
    times = np.empty(m)
    events = np.empty(m, dtype=np.int64)
    collided = np.empty(m, dtype=np.bool_)
    jumps = np.empty(m, dtype=np.int64)
    for i in range(m):
        kd, t, k, col, jp, _, _ = _lumped_kernel(N, a, b, c, pr, seeds[i], max_events, stop_at_collision)
        kinds[i] = kd
        times[i] = t
        events[i] = k
        collided[i] = col
        jumps[i] = jp
    return kinds, times, events, collided, jumps


def _move_probs(params):
    return np.array([m[4] for m in _moves(derive(params))])


def _start(N, start):
    if start.N != N:
        raise ValueError(f"start state {start} does not have N={N} individuals")
    return start.n_A, start.n_B, start.n_AB


def default_max_events(N: int) -> int:
    return 10_000 * N * (N - 1) // 2


def simulate_lumped(N: int, params: FitnessParams, start: CountState, seed: int,
                    max_events: int | None = None) -> SimOutcome:
    a, b, c = _start(N, start)
    kind, t, k, _, _, a, b = _lumped_kernel(N, a, b, c, _move_probs(params), np.uint64(seed),
                                            max_events or default_max_events(N), False)
    return SimOutcome(_KINDS[kind], float(t), int(k), (int(a), int(b), N - int(a) - int(b)))


def simulate_lumped_batch(N: int, params: FitnessParams, start: CountState, seeds,
                          max_events: int | None = None):
    """Replicates of the count chain; returns (kinds, times, events) like run_batch."""
    a, b, c = _start(N, start)
    kinds, times, events, _, _ = _lumped_batch(
        N, a, b, c, _move_probs(params), np.ascontiguousarray(seeds, dtype=np.uint64),
        max_events or default_max_events(N), False)
    return kinds, times, events


def collision_runs(N: int, params: FitnessParams, seeds, max_events: int | None = None):
    """From (0, N-1, 1): per replicate, (collided, n_AB jumps before collision or absorption)."""
    _, _, _, collided, jumps = _lumped_batch(
        N, 0, N - 1, 1, _move_probs(params), np.ascontiguousarray(seeds, dtype=np.uint64),
        max_events or default_max_events(N), True)
    return collided, jumps


def collision_experiment(N: int, params: FitnessParams, replicates: int, seed: int) -> EstimateWithCI:
    """Frequency of an AB-AB interaction before absorption, from one bilingual."""
    collided, _ = collision_runs(N, params, replicate_seeds(seed, 0, replicates))
    return EstimateWithCI.from_counts(int(collided.sum()), replicates)


# -- dominating birth-death process ---------------------------------------------

@dataclass(frozen=True)
class BirthDeathRun:
    extinct: bool
    J: int
    peak: int
    censored: bool


@njit(cache=True, nogil=True)
def _bd_kernel(q, seed, max_jumps):
    z = 1
    j = 0
    peak = 1
    while z > 0 and j < max_jumps:
        if _u(seed, STREAM_BIRTH_DEATH, j, 0) < q:
            z += 1
            if z > peak:
                peak = z
        else:
            z -= 1
        j += 1
    return z == 0, j, peak


@njit(cache=True, nogil=True)
def _bd_batch(q, seeds, max_jumps):
    m = seeds.size
    ext = np.empty(m, dtype=np.bool_)
    js = np.empty(m, dtype=np.int64)
    peaks = np.empty(m, dtype=np.int64)
    for i in range(m):
        ext[i], js[i], peaks[i] = _bd_kernel(q, seeds[i], max_jumps)
    return ext, js, peaks


def birth_death(N: int, params: FitnessParams, max_jumps: int, seed: int) -> BirthDeathRun:
    """Birth rate N q_A and death rate N (1 - q_A) per individual, from Z_0 = 1.

    Only the jump chain matters for J and the peak: each jump is a birth with
    probability q_A whatever N is.
    """
    ext, j, peak = _bd_kernel(derive(params).q_A, np.uint64(seed), max_jumps)
    return BirthDeathRun(bool(ext), int(j), int(peak), censored=not ext)


def birth_death_batch(N: int, params: FitnessParams, max_jumps: int, seeds):
    """Arrays (extinct, J, peak) for one run per seed."""
    return _bd_batch(derive(params).q_A, np.ascontiguousarray(seeds, dtype=np.uint64), max_jumps)


def jump_count_bound(n: int, q_A: float) -> float:
    """C(2n, n) q^n (1-q)^(n+1): path-count bound on P(J = 2n + 1)."""
    from math import comb

    return comb(2 * n, n) * q_A**n * (1 - q_A) ** (n + 1)
