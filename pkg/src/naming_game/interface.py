"""The one-dimensional interface seen from the rightmost A of the leading block.

Under the restriction that no site at distance 3 or more from the interface
holds word A, the configuration right of the interface X_t is one of

* type 0: ``A | B B B ...``
* type 1: ``A | AB B B ...``
* type 2: ``A | AB AB B ...``

and (type, X) is a Markov additive process. This module solves the type chain
exactly, computes the drift of X in each type and the asymptotic speed, and
simulates both the reduced chain and the restricted lattice itself.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .model import FitnessParams, derive, transition
from .rng import STREAM_INTERFACE, STREAM_LATTICE, philox4x64, to_open_unit

ALLOWED_TYPE_MOVES = frozenset({(0, 1), (1, 0), (1, 2), (2, 0), (2, 1), (2, 2)})


@dataclass(frozen=True)
class Move:
    rate: float
    dx: int
    to: int


@dataclass(frozen=True)
class InterfaceModel:
    phi: float
    r: float
    rates: dict  # "r01" ... "r21"
    displacement_law: tuple[tuple[Move, ...], ...] = field(repr=False)
    generator: np.ndarray = field(repr=False)
    pi: np.ndarray
    D: np.ndarray
    speed: float


def displacement_law(params: FitnessParams) -> tuple[tuple[Move, ...], ...]:
    pr = derive(params)
    pab, pba, qa, qb = pr.p_AB, pr.p_BA, pr.q_A, pr.q_B
    return (
        # type 0: the A at X meets the B at X+1
        (Move(pab, 0, 1), Move(pba, -1, 1)),
        # type 1: A-AB edge at (X, X+1), AB-B edge at (X+1, X+2)
        (Move(1 - qb, 1, 0), Move(1 - qa, 0, 0), Move(qb, -1, 2), Move(qa, 0, 2)),
        # type 2: A-AB at (X, X+1), AB-AB at (X+1, X+2), AB-B at (X+2, X+3);
        # the two self-loops are followed by the forced flip of X+3 to B
        (Move(1 - qb, 1, 1), Move(1 - qa, 0, 1), Move(pab, 2, 0), Move(pba, 0, 0),
         Move(qb, -1, 2), Move(qa, 0, 2)),
    )


def _generator(law) -> np.ndarray:
    q = np.zeros((3, 3))
    for j, moves in enumerate(law):
        for m in moves:
            if m.to != j:
                q[j, m.to] += m.rate
                q[j, j] -= m.rate
    return q


def stationary(q: np.ndarray) -> np.ndarray:
    """Solve pi Q = 0, sum(pi) = 1 by replacing one balance equation."""
    a = q.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(q.shape[0])
    b[-1] = 1.0
    return np.linalg.solve(a, b)


def build_model(params: FitnessParams) -> InterfaceModel:
    pr = derive(params)
    law = displacement_law(params)
    q = _generator(law)
    pi = stationary(q)
    d1 = 1 - 2 * pr.q_B
    D = np.array([-pr.p_BA, d1, d1 + 2 * pr.p_AB])
    r = pr.r
    rates = {"r01": q[0, 1], "r10": q[1, 0], "r12": q[1, 2], "r20": q[2, 0], "r21": q[2, 1]}
    return InterfaceModel(pr.phi, r, rates, law, q, pi, D, float(pi @ D))


def speed(params: FitnessParams) -> float:
    return build_model(params).speed


def frozen_weights_sign(params: FitnessParams) -> int:
    """sign(17 D_0 + 10 D_1 + 2 D_2): the drift sign with pi frozen at r = 1/2."""
    D = build_model(params).D
    return int(np.sign(17 * D[0] + 10 * D[1] + 2 * D[2]))


def quadratic_sign(phi: float) -> int:
    return int(np.sign(48 * phi * phi - 23 * phi - 29))


def critical_quadratic() -> float:
    return (23 + math.sqrt(6097)) / 96


def critical_exact(tol: float = 1e-10) -> float:
    """Root of phi -> speed(phi) by bisection on [1, 3]."""
    lo, hi = 1.0, 3.0
    f_lo, f_hi = speed(FitnessParams.from_ratio(lo)), speed(FitnessParams.from_ratio(hi))
    if not f_lo < 0 < f_hi:
        raise RuntimeError(f"speed does not change sign on [1, 3]: {f_lo}, {f_hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if speed(FitnessParams.from_ratio(mid)) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def long_run_variance(model: InterfaceModel, reward=None, jump_reward: bool = True) -> float:
    """Asymptotic variance rate of an additive functional of the interface.

    The functional accrues ``reward[type]`` per unit time plus ``dx`` at each
    move (if ``jump_reward``). With h solving the Poisson equation, the
    centred functional is a martingale up to a bounded term, so its variance
    rate is sum_j pi_j sum_moves rate * (jump + h(to) - h(j))^2.
    """
    f = np.zeros(3) if reward is None else np.asarray(reward, dtype=float)
    law = model.displacement_law
    jump_mean = np.array([sum(m.rate * m.dx for m in moves) if jump_reward else 0.0 for moves in law])
    g = f + jump_mean
    mean = model.pi @ g
    # Q h = mean - g, pinned by pi h = 0
    a = np.vstack([model.generator, model.pi])
    h = np.linalg.lstsq(a, np.append(mean - g, 0.0), rcond=None)[0]
    var = 0.0
    for j, moves in enumerate(law):
        for m in moves:
            jump = (m.dx if jump_reward else 0.0) + h[m.to] - h[j]
            var += model.pi[j] * m.rate * jump * jump
    return float(var)


def speed_sigma(model: InterfaceModel, t: float) -> float:
    """Standard deviation of X_t / t for large t."""
    return math.sqrt(long_run_variance(model) / t)


def occupation_sigma(model: InterfaceModel, t: float) -> np.ndarray:
    """Standard deviations of the time fractions spent in each type."""
    return np.array([math.sqrt(long_run_variance(model, np.eye(3)[i], jump_reward=False) / t)
                     for i in range(3)])


@dataclass
class InterfaceTrajectory:
    t: np.ndarray
    x: np.ndarray
    type: np.ndarray
    occupation: np.ndarray
    speed: float
    t_max: float
    final_x: int
    events: int
    flips: int = 0
    aborted: bool = False
    type_moves: frozenset = frozenset()

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,x,type\n")
        for ti, xi, yi in zip(self.t, self.x, self.type):
            buf.write(f"{float(ti)!r},{int(xi)},{int(yi)}\n")
        return buf.getvalue()


def _law_arrays(law):
    k = max(len(m) for m in law)
    rate = np.zeros((3, k))
    dx = np.zeros((3, k), dtype=np.int64)
    to = np.zeros((3, k), dtype=np.int64)
    for j, moves in enumerate(law):
        for i, m in enumerate(moves):
            rate[j, i], dx[j, i], to[j, i] = m.rate, m.dx, m.to
    return rate, dx, to


@njit(inline="always")
def _grow(rec, n):
    if n == rec.shape[0]:
        g = np.empty((2 * n, 3))
        g[:n] = rec
        return g
    return rec


@njit(cache=True, nogil=True)
def _chain_kernel(rate, dx, to, seed, t_max, stride):
    total = rate.sum(axis=1)
    y = 0
    x = 0
    t = 0.0
    occ = np.zeros(3)
    moves = np.zeros((3, 3), dtype=np.int64)
    record = stride > 0.0
    rec = np.empty((1024 if record else 1, 3))
    n_rec = 0
    grid_k = 0
    k = 0
    while True:
        w = philox4x64(np.uint64(k), np.uint64(0), np.uint64(0), np.uint64(STREAM_INTERFACE),
                       np.uint64(seed), np.uint64(0))
        t_new = t - np.log(to_open_unit(w[0])) / total[y]
        if record:
            while grid_k * stride <= t_max and grid_k * stride < t_new:
                rec = _grow(rec, n_rec)
                rec[n_rec, 0] = grid_k * stride
                rec[n_rec, 1] = x
                rec[n_rec, 2] = y
                n_rec += 1
                grid_k += 1
        if t_new >= t_max:
            occ[y] += t_max - t
            break
        occ[y] += t_new - t
        t = t_new
        v = to_open_unit(w[1]) * total[y]
        i = 0
        while i < rate.shape[1] - 1 and (v >= rate[y, i] or rate[y, i] == 0.0):
            v -= rate[y, i]
            i += 1
        while rate[y, i] == 0.0:
            i -= 1
        x += dx[y, i]
        moves[y, to[y, i]] += 1
        y = to[y, i]
        k += 1
    return occ / t_max, x, k, moves, rec[:n_rec]


def _moves_set(m):
    return frozenset((int(a), int(b)) for a, b in zip(*np.nonzero(m)))


def simulate_interface(params: FitnessParams, t_max: float, seed: int,
                       record_stride: float | None = None) -> InterfaceTrajectory:
    """Simulate the reduced (type, X) chain by competing exponentials, from type 0 at X = 0."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    rate, dx, to = _law_arrays(displacement_law(params))
    occ, x, k, moves, rec = _chain_kernel(rate, dx, to, np.uint64(seed), float(t_max),
                                          float(record_stride or 0.0))
    return InterfaceTrajectory(rec[:, 0], rec[:, 1].astype(np.int64), rec[:, 2].astype(np.int64),
                               occ, x / t_max, t_max, int(x), int(k), type_moves=_moves_set(moves))


@njit(cache=True, nogil=True)
def _lattice_kernel(width, t_ab, t_pab, t_qa, seed, t_max, stride):
    # window of 2*width+1 sites; beyond it everything is A on the left, B on the right
    size = 2 * width + 1
    s = np.empty(size, dtype=np.int8)
    c = width
    for i in range(size):
        s[i] = 0 if i <= c else 2
    offset = -c  # absolute position of window index 0
    xi = c
    y = 0
    n_edges = size - 1
    occ = np.zeros(3)
    moves = np.zeros((3, 3), dtype=np.int64)
    record = stride > 0.0
    rec = np.empty((1024 if record else 1, 3))
    n_rec = 0
    grid_k = 0
    t = 0.0
    k = 0
    flips = 0
    aborted = False
    bad_type = False
    while True:
        g = philox4x64(np.uint64(k), np.uint64(0), np.uint64(0), np.uint64(STREAM_LATTICE),
                       np.uint64(seed), np.uint64(0))
        t_new = t - np.log(to_open_unit(g[0])) / n_edges
        if record:
            while grid_k * stride <= t_max and grid_k * stride < t_new:
                rec = _grow(rec, n_rec)
                rec[n_rec, 0] = grid_k * stride
                rec[n_rec, 1] = offset + xi
                rec[n_rec, 2] = y
                n_rec += 1
                grid_k += 1
        if t_new >= t_max:
            occ[y] += t_max - t
            break
        occ[y] += t_new - t
        t = t_new
        e = int(to_open_unit(g[1]) * n_edges)
        if e >= n_edges:
            e = n_edges - 1
        # the mark is the third word of this event's block: one fresh mark per event
        nx, ny, _ = transition(s[e], s[e + 1], to_open_unit(g[2]), t_ab, t_pab, t_qa)
        s[e] = nx
        s[e + 1] = ny
        k += 1
        # interface: last site of the leading A block
        j = 0
        while j < size and s[j] == 0:
            j += 1
        xi_new = j - 1
        if xi_new < 0 or xi_new + 3 >= size:
            aborted = True
            break
        if s[xi_new + 3] != 2:
            s[xi_new + 3] = 2
            flips += 1
        for i in range(xi_new + 4, size):
            if s[i] != 2:
                bad_type = True
        n_ab = 0
        if s[xi_new + 1] == 1:
            n_ab = 1
            if s[xi_new + 2] == 1:
                n_ab = 2
            elif s[xi_new + 2] != 2:
                bad_type = True
        elif s[xi_new + 1] != 2 or s[xi_new + 2] != 2:
            bad_type = True
        moves[y, n_ab] += (xi_new != xi) or (n_ab != y)
        xi = xi_new
        y = n_ab
        # recentre when the interface drifts a quarter window away
        shift = xi - c
        if shift > width // 2 or -shift > width // 2:
            if shift > 0:
                for i in range(size - shift):
                    s[i] = s[i + shift]
                for i in range(size - shift, size):
                    s[i] = 2
            else:
                d = -shift
                for i in range(size - 1, d - 1, -1):
                    s[i] = s[i - d]
                for i in range(d):
                    s[i] = 0
            offset += shift
            xi = c
    return occ / t_max, offset + xi, k, moves, flips, aborted, bad_type, rec[:n_rec]


def simulate_restricted_lattice(params: FitnessParams, window_half_width: int, t_max: float,
                                seed: int, record_stride: float | None = None) -> InterfaceTrajectory:
    """Run the naming game on a moving path window with the distance-3 restriction.

    All window edges fire at rate one; after each interaction the site three to
    the right of the interface is forced to B if needed. Starts from the step
    configuration (A on x <= 0, B on x > 0).
    """
    if window_half_width < 10:
        raise ValueError("window_half_width must be at least 10")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    t_ab, t_pab, t_qa = derive(params).thresholds()
    occ, x, k, moves, flips, aborted, bad, rec = _lattice_kernel(
        window_half_width, t_ab, t_pab, t_qa, np.uint64(seed), float(t_max),
        float(record_stride or 0.0))
    if bad:
        raise RuntimeError("restricted lattice left the three interface types")
    return InterfaceTrajectory(rec[:, 0], rec[:, 1].astype(np.int64), rec[:, 2].astype(np.int64),
                               occ, x / t_max, t_max, int(x), int(k), int(flips), bool(aborted),
                               _moves_set(moves))
