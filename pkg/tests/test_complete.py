import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from naming_game.complete import (
    CountState, birth_death, birth_death_batch, collision_runs, exact_absorption, jump_count_bound,
    lumped_rates, simulate_lumped, simulate_lumped_batch,
)
from naming_game.engine import Outcome
from naming_game.model import A, AB, B, FitnessParams, State, derive, transition_probabilities
from naming_game.rng import replicate_seeds


def _full_chain_absorption(N, params):
    # absorption in all-A for the unlumped chain on K_N, every edge at rate one
    raw = transition_probabilities(params)
    states = list(itertools.product(State, repeat=N))
    idx = {s: i for i, s in enumerate(states)}
    m = np.eye(len(states))
    rhs = np.zeros(len(states))
    for s, i in idx.items():
        if len(set(s)) == 1 and s[0] in (A, B):
            rhs[i] = 1.0 if s[0] == A else 0.0
            continue
        out = {}
        for u, v in itertools.combinations(range(N), 2):
            key = tuple(sorted((s[u], s[v])))
            for (x, y), p in raw.get(key, {}).items():
                t = list(s)
                t[u], t[v] = (x, y) if s[u] <= s[v] else (y, x)
                out[tuple(t)] = out.get(tuple(t), 0.0) + p
        total = sum(out.values())
        for t, r in out.items():
            m[i, idx[t]] -= r / total
    p = np.linalg.solve(m, rhs)
    return {s: p[i] for s, i in idx.items()}


@pytest.mark.parametrize("N", [2, 3, 4])
@pytest.mark.parametrize("phi", [0.7, 2.0, 5.0])
def test_exact_matches_full_chain(N, phi):
    params = FitnessParams(phi)
    full = _full_chain_absorption(N, params)
    lumped = exact_absorption(N, params)
    for s, p in full.items():
        c = CountState(s.count(A), s.count(B), s.count(AB))
        assert lumped[c] == pytest.approx(p, abs=1e-10)


def test_exact_k2_closed_form():
    pr = derive(FitnessParams(4.0))
    assert exact_absorption(2, FitnessParams(4.0))[CountState(0, 1, 1)] == pytest.approx(pr.q_A * pr.p_AB, abs=1e-12)


def test_exact_boundaries_and_cap():
    p = exact_absorption(6, FitnessParams(1.5))
    assert p[CountState(6, 0, 0)] == 1.0 and p[CountState(0, 6, 0)] == 0.0
    assert all(0.0 <= v <= 1.0 for v in p.values())
    with pytest.raises(ValueError):
        exact_absorption(61, FitnessParams(2.0))
    with pytest.raises(ValueError):
        exact_absorption(1, FitnessParams(2.0))


def test_exact_symmetry_under_word_swap():
    pa = exact_absorption(7, FitnessParams(2.5))
    pb = exact_absorption(7, FitnessParams(1 / 2.5))
    for s, v in pa.items():
        assert v == pytest.approx(1 - pb[CountState(s.n_B, s.n_A, s.n_AB)], abs=1e-10)


@given(st.integers(0, 8), st.integers(0, 8), st.integers(0, 8), st.floats(0.2, 10))
def test_lumped_total_rate(a, b, c, phi):
    # every edge fires at rate one and only A-A and B-B edges are inert
    rates = lumped_rates(CountState(a, b, c), FitnessParams(phi))
    moving = a * b + a * c + b * c + c * (c - 1) // 2
    assert sum(r for _, r in rates) == pytest.approx(moving, rel=1e-12, abs=1e-12)
    for t, _ in rates:
        assert t.N == a + b + c


def test_lumped_mc_matches_exact():
    N, phi, n = 10, 4.0, 20_000
    start = CountState(0, N - 1, 1)
    p = exact_absorption(N, FitnessParams(phi))[start]
    kinds, _, _ = simulate_lumped_batch(N, FitnessParams(phi), start, replicate_seeds(8, 0, n))
    assert abs(np.mean(kinds == 0) - p) <= 4 * np.sqrt(p * (1 - p) / n)


def test_simulate_lumped_outcome():
    out = simulate_lumped(5, FitnessParams(3.0), CountState(0, 4, 1), seed=2)
    assert out.kind in (Outcome.ABSORBED_A, Outcome.ABSORBED_B)
    assert sum(out.final_counts) == 5
    with pytest.raises(ValueError):
        simulate_lumped(5, FitnessParams(3.0), CountState(0, 3, 1), seed=2)


def test_birth_death_first_jump():
    n = 40_000
    q = derive(FitnessParams(2.0)).q_A
    ext, J, peak = birth_death_batch(50, FitnessParams(2.0), 10_000, replicate_seeds(3, 0, n))
    assert abs(np.mean(J == 1) - (1 - q)) <= 4 * np.sqrt(q * (1 - q) / n)
    assert np.all(J[ext] % 2 == 1)
    assert np.all(peak >= 1)


def test_birth_death_single_run():
    run = birth_death(10, FitnessParams(1.0), 5, seed=1)
    assert run.J <= 5
    assert run.censored == (not run.extinct)


def test_jump_bound_dominates_catalan_law():
    # P(J = 2n+1) = Catalan(n) q^n (1-q)^(n+1) for the walk started at one
    from math import comb

    q = 0.3
    for n in range(12):
        exact = comb(2 * n, n) // (n + 1) * q**n * (1 - q) ** (n + 1)
        assert exact <= jump_count_bound(n, q) + 1e-15


def test_collision_prefix_is_birth_death():
    # before the first AB-AB contact there is no A, so n_AB moves like the birth-death walk
    N, phi, n = 200, 2.0, 20_000
    q = derive(FitnessParams(phi)).q_A
    collided, jumps = collision_runs(N, FitnessParams(phi), replicate_seeds(4, 0, n))
    freq = np.mean(~collided & (jumps == 1))
    assert abs(freq - (1 - q)) <= 4 * np.sqrt(q * (1 - q) / n)
