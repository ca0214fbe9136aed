"""Event-driven continuous-time simulation on a finite graph.

The process is built from the graphical representation: each edge carries a
rate-one Poisson clock and a sequence of uniform marks. A run simulates the
superposition of the clocks (exponential gap with rate |E|, uniform edge
choice) drawn from the global stream, while the mark used at the n-th firing
of edge e always comes from the keyed stream (seed, e, n). Two copies driven
by the same seed therefore see the same edges fire with the same marks.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .graphs import Graph, edge_type_counts
from .model import LABELS, DerivedProbs, FitnessParams, State, derive, transition
from .rng import STREAM_EDGE, STREAM_GLOBAL, philox4x64, to_open_unit

_A, _AB, _B = 0, 1, 2
KIND_A, KIND_B, KIND_TIMEOUT = 0, 1, 2


class Outcome(str, Enum):
    ABSORBED_A = "AbsorbedA"
    ABSORBED_B = "AbsorbedB"
    TIMEOUT = "Timeout"


_KINDS = (Outcome.ABSORBED_A, Outcome.ABSORBED_B, Outcome.TIMEOUT)


@dataclass(frozen=True)
class Configuration:
    states: np.ndarray

    def __post_init__(self):
        s = np.array(self.states, dtype=np.int8)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("configuration must be a non-empty 1-d sequence")
        if s.min() < 0 or s.max() > 2:
            raise ValueError("state codes must be 0 (A), 1 (AB) or 2 (B)")
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    @classmethod
    def from_states(cls, states) -> "Configuration":
        return cls(np.array([int(State.parse(x)) for x in states], dtype=np.int8))

    @classmethod
    def uniform(cls, n: int, state) -> "Configuration":
        return cls(np.full(n, int(State.parse(state)), dtype=np.int8))

    @classmethod
    def single_ab(cls, n: int, x: int) -> "Configuration":
        if not 0 <= x < n:
            raise ValueError(f"vertex {x} out of range")
        s = np.full(n, _B, dtype=np.int8)
        s[x] = _AB
        return cls(s)

    @property
    def n_vertices(self) -> int:
        return self.states.size

    @property
    def counts(self) -> tuple[int, int, int]:
        """(n_A, n_B, n_AB)."""
        c = np.bincount(self.states, minlength=3)
        return int(c[_A]), int(c[_B]), int(c[_AB])

    def __eq__(self, other):
        return isinstance(other, Configuration) and np.array_equal(self.states, other.states)

    def __hash__(self):
        return hash(self.states.tobytes())

    def __str__(self):
        return ",".join(State(int(x)).name for x in self.states)


@dataclass(frozen=True)
class SimOutcome:
    kind: Outcome
    absorption_time: float
    events_executed: int
    final_counts: tuple[int, int, int]


@dataclass(frozen=True)
class TrajectoryRecord:
    t: np.ndarray
    n_A: np.ndarray
    n_B: np.ndarray
    n_AB: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,n_A,n_B,n_AB\n")
        for row in zip(self.t, self.n_A, self.n_B, self.n_AB):
            buf.write(f"{float(row[0])!r},{int(row[1])},{int(row[2])},{int(row[3])}\n")
        return buf.getvalue()


@njit(inline="always")
def _event(seed, k, n_edges):
    """Draw the k-th global event: (time gap, edge, mark)."""
    key = np.uint64(seed)
    g0, g1, _, _ = philox4x64(np.uint64(k), np.uint64(0), np.uint64(0),
                              np.uint64(STREAM_GLOBAL), key, np.uint64(0))
    gap = -np.log(to_open_unit(g0)) / n_edges
    e = int(to_open_unit(g1) * n_edges)
    if e >= n_edges:
        e = n_edges - 1
    return gap, e


@njit(inline="always")
def _mark(seed, e, n):
    _, w1, _, _ = philox4x64(np.uint64(n), np.uint64(e), np.uint64(0),
                             np.uint64(STREAM_EDGE), np.uint64(seed), np.uint64(0))
    return to_open_unit(w1)


@njit(cache=True, nogil=True)
def _run_kernel(eu, ev, init, t_ab, t_pab, t_qa, seed, max_events, stride):
    s = init.copy()
    n = s.size
    n_edges = eu.size
    n_a = 0
    n_b = 0
    for i in range(n):
        if s[i] == _A:
            n_a += 1
        elif s[i] == _B:
            n_b += 1
    counters = np.zeros(n_edges, dtype=np.uint64)
    record = stride > 0.0
    rec = np.empty((1024 if record else 1, 4))
    n_rec = 0
    if record:
        rec[0, 0] = 0.0
        rec[0, 1] = n_a
        rec[0, 2] = n_b
        rec[0, 3] = n - n_a - n_b
        n_rec = 1
    grid_k = 1
    t = 0.0
    k = 0
    while n_a != n and n_b != n and k < max_events:
        gap, e = _event(seed, k, n_edges)
        t_new = t + gap
        if record:
            while grid_k * stride < t_new:
                if n_rec == rec.shape[0]:
                    grown = np.empty((2 * n_rec, 4))
                    grown[:n_rec] = rec
                    rec = grown
                rec[n_rec, 0] = grid_k * stride
                rec[n_rec, 1] = n_a
                rec[n_rec, 2] = n_b
                rec[n_rec, 3] = n - n_a - n_b
                n_rec += 1
                grid_k += 1
        t = t_new
        u = _mark(seed, e, counters[e])
        counters[e] += np.uint64(1)
        x = eu[e]
        y = ev[e]
        sx = s[x]
        sy = s[y]
        nx, ny, _ = transition(sx, sy, u, t_ab, t_pab, t_qa)
        n_a += (nx == _A) + (ny == _A) - (sx == _A) - (sy == _A)
        n_b += (nx == _B) + (ny == _B) - (sx == _B) - (sy == _B)
        s[x] = nx
        s[y] = ny
        k += 1
    if n_a == n:
        kind = KIND_A
    elif n_b == n:
        kind = KIND_B
    else:
        kind = KIND_TIMEOUT
    if record and t > rec[n_rec - 1, 0]:
        if n_rec == rec.shape[0]:
            grown = np.empty((n_rec + 1, 4))
            grown[:n_rec] = rec
            rec = grown
        rec[n_rec, 0] = t
        rec[n_rec, 1] = n_a
        rec[n_rec, 2] = n_b
        rec[n_rec, 3] = n - n_a - n_b
        n_rec += 1
    return kind, t, k, n_a, n_b, rec[:n_rec], s


@njit(cache=True, nogil=True)
def _run_batch_kernel(eu, ev, init, t_ab, t_pab, t_qa, seeds, max_events):
    m = seeds.size
    kinds = np.empty(m, dtype=np.int64)
    times = np.empty(m)
    events = np.empty(m, dtype=np.int64)
    for i in range(m):
        kind, t, k, _, _, _, _ = _run_kernel(eu, ev, init, t_ab, t_pab, t_qa, seeds[i], max_events, 0.0)
        kinds[i] = kind
        times[i] = t
        events[i] = k
    return kinds, times, events


def default_max_events(g: Graph) -> int:
    return 10_000 * g.n_edges


def _check(g: Graph, init: Configuration):
    if init.n_vertices != g.n_vertices:
        raise ValueError(f"configuration has {init.n_vertices} vertices, graph has {g.n_vertices}")


def run(g: Graph, params: FitnessParams, init: Configuration, seed: int,
        max_events: int | None = None, record_stride: float | None = None,
        return_final: bool = False):
    """Simulate until absorption or ``max_events`` interactions.

    Returns ``(SimOutcome, TrajectoryRecord | None)``; with ``return_final``
    the final Configuration is appended.
    """
    _check(g, init)
    if max_events is None:
        max_events = default_max_events(g)
    if max_events <= 0:
        raise ValueError("max_events must be positive")
    if record_stride is not None and record_stride <= 0:
        raise ValueError("record_stride must be positive")
    t_ab, t_pab, t_qa = derive(params).thresholds()
    eu, ev = g.edge_arrays()
    kind, t, k, n_a, n_b, rec, final = _run_kernel(
        eu, ev, init.states, t_ab, t_pab, t_qa, np.uint64(seed), max_events,
        float(record_stride or 0.0))
    n = g.n_vertices
    out = SimOutcome(_KINDS[kind], float(t), int(k), (int(n_a), int(n_b), n - int(n_a) - int(n_b)))
    traj = None
    if record_stride:
        counts = rec[:, 1:].astype(np.int64)
        traj = TrajectoryRecord(rec[:, 0].copy(), counts[:, 0], counts[:, 1], counts[:, 2])
    if return_final:
        return out, traj, Configuration(final)
    return out, traj


def run_batch(g: Graph, params: FitnessParams, init: Configuration, seeds,
              max_events: int | None = None):
    """Independent replicates, one per seed. Returns (kinds, times, events) arrays.

    ``kinds`` uses 0 = AbsorbedA, 1 = AbsorbedB, 2 = Timeout.
    """
    _check(g, init)
    if max_events is None:
        max_events = default_max_events(g)
    t_ab, t_pab, t_qa = derive(params).thresholds()
    eu, ev = g.edge_arrays()
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    return _run_batch_kernel(eu, ev, init.states, t_ab, t_pab, t_qa, seeds, max_events)


# -- coupling ----------------------------------------------------------------

@njit(cache=True, nogil=True)
def _coupled_kernel(eu, ev, s_hi, s_lo, t_ab, t_pab, t_qa, seed, seed_lo, max_events):
    # s_hi is the A-richer copy; order holds iff code(s_hi) <= code(s_lo) everywhere
    s1 = s_hi.copy()
    s2 = s_lo.copy()
    n = s1.size
    n_edges = eu.size
    a1n, b1n, a2n, b2n = 0, 0, 0, 0
    for i in range(n):
        a1n += s1[i] == _A
        b1n += s1[i] == _B
        a2n += s2[i] == _A
        b2n += s2[i] == _B
    counters = np.zeros(n_edges, dtype=np.uint64)
    joint = np.zeros((10, 10), dtype=np.int64)
    first_bad = -1
    n_bad = 0
    k = 0
    while k < max_events:
        if (a1n == n or b1n == n) and (a2n == n or b2n == n):
            break
        _, e = _event(seed, k, n_edges)
        u1 = _mark(seed, e, counters[e])
        u2 = _mark(seed_lo, e, counters[e])
        counters[e] += np.uint64(1)
        x = eu[e]
        y = ev[e]
        a1, b1, l1 = transition(s1[x], s1[y], u1, t_ab, t_pab, t_qa)
        a2, b2, l2 = transition(s2[x], s2[y], u2, t_ab, t_pab, t_qa)
        a1n += (a1 == _A) + (b1 == _A) - (s1[x] == _A) - (s1[y] == _A)
        b1n += (a1 == _B) + (b1 == _B) - (s1[x] == _B) - (s1[y] == _B)
        a2n += (a2 == _A) + (b2 == _A) - (s2[x] == _A) - (s2[y] == _A)
        b2n += (a2 == _B) + (b2 == _B) - (s2[x] == _B) - (s2[y] == _B)
        s1[x] = a1
        s1[y] = b1
        s2[x] = a2
        s2[y] = b2
        joint[l1, l2] += 1
        if a1 > a2 or b1 > b2:
            n_bad += 1
            if first_bad < 0:
                first_bad = k
        k += 1
    return first_bad, n_bad, k, joint, s1, s2


@dataclass(frozen=True)
class OrderingReport:
    held: bool
    first_violation: int | None
    n_violations: int
    events: int
    joint_labels: np.ndarray
    final_hi: Configuration
    final_lo: Configuration

    def label_pairs(self) -> set[tuple[str, str]]:
        i, j = np.nonzero(self.joint_labels)
        return {(LABELS[a], LABELS[b]) for a, b in zip(i, j)}


def is_ordered(hi: Configuration, lo: Configuration) -> bool:
    """``lo(z) = A => hi(z) = A`` and ``hi(z) = B => lo(z) = B`` for all z."""
    return bool(np.all(hi.states <= lo.states))


def run_coupled(g: Graph, params: FitnessParams, init1: Configuration, init2: Configuration,
                seed: int, max_events: int | None = None, *, _seed_lo: int | None = None) -> OrderingReport:
    """Run two copies on one graphical representation and watch the ordering.

    ``init1`` is the A-richer copy and ``init2`` the B-richer one: wherever
    ``init2`` is A so is ``init1``, and wherever ``init1`` is B so is
    ``init2``. The run stops when both copies are absorbed.
    """
    _check(g, init1)
    _check(g, init2)
    if not is_ordered(init1, init2):
        raise ValueError("initial configurations are not ordered")
    if max_events is None:
        max_events = default_max_events(g)
    t_ab, t_pab, t_qa = derive(params).thresholds()
    eu, ev = g.edge_arrays()
    seed_lo = seed if _seed_lo is None else _seed_lo
    first, n_bad, k, joint, s1, s2 = _coupled_kernel(
        eu, ev, init1.states, init2.states, t_ab, t_pab, t_qa,
        np.uint64(seed), np.uint64(seed_lo), max_events)
    return OrderingReport(
        held=n_bad == 0, first_violation=None if first < 0 else int(first),
        n_violations=int(n_bad), events=int(k), joint_labels=joint,
        final_hi=Configuration(s1), final_lo=Configuration(s2),
    )


# -- supermartingale ---------------------------------------------------------

def drift_coefficients(probs: DerivedProbs, a: float) -> dict[tuple[State, State], float]:
    """Per-edge-type factor multiplying M_t in the generator of a^(A_t - B_t)."""
    if a <= 0:
        raise ValueError("a must be positive")
    q_A, q_B, p_ab, p_ba = probs.q_A, probs.q_B, probs.p_AB, probs.p_BA
    ia = 1.0 / a
    return {
        (State.A, State.AB): (a - 1) * (1 - q_B) + (ia - 1) * q_B,
        (State.AB, State.B): (a - 1) * q_A + (ia - 1) * (1 - q_A),
        (State.A, State.B): (a - 1) * p_ab + (ia - 1) * p_ba,
        (State.AB, State.AB): (a * a - 1) * p_ab + (ia * ia - 1) * p_ba,
    }


def supermartingale_drift(config: Configuration, g: Graph, params: FitnessParams, a: float) -> float:
    """Infinitesimal drift of M_t = a^(A_t - B_t) in configuration ``config``."""
    if not 0 < a <= 1:
        raise ValueError("a must lie in (0, 1]")
    e = edge_type_counts(config.states, g)
    n_a, n_b, _ = config.counts
    m = a ** (n_a - n_b)
    coef = drift_coefficients(derive(params), a)
    return m * sum(e[x, y] * c for (x, y), c in coef.items())
