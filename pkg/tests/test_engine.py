import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from naming_game.engine import (
    KIND_A, KIND_TIMEOUT, Configuration, Outcome, drift_coefficients, is_ordered, run, run_batch, run_coupled,
    supermartingale_drift,
)
from naming_game.graphs import complete, cycle, from_edge_list, path, torus2d
from naming_game.model import A, AB, B, FitnessParams, State, derive, transition_probabilities
from naming_game.rng import RandomSource, replicate_seeds


def test_configuration_basics():
    c = Configuration.from_states(["A", "AB", "B", "B"])
    assert c.counts == (1, 2, 1)
    assert str(c) == "A,AB,B,B"
    assert c == Configuration.from_states([0, 1, 2, 2])
    with pytest.raises(ValueError):
        c.states[0] = 2
    assert Configuration.single_ab(4, 2).counts == (0, 3, 1)


def test_uniform_configurations_are_already_absorbed():
    g = cycle(5)
    out, _ = run(g, FitnessParams(2.0), Configuration.uniform(5, A), seed=1)
    assert out.kind is Outcome.ABSORBED_A and out.events_executed == 0
    out, _ = run(g, FitnessParams(2.0), Configuration.uniform(5, B), seed=1)
    assert out.kind is Outcome.ABSORBED_B


def test_size_mismatch():
    with pytest.raises(ValueError):
        run(cycle(5), FitnessParams(1.0), Configuration.uniform(4, B), seed=0)


def test_same_seed_same_run():
    g = torus2d(5)
    init = Configuration.single_ab(25, 3)
    a = run(g, FitnessParams(4.0), init, seed=123, record_stride=0.5, return_final=True)
    b = run(g, FitnessParams(4.0), init, seed=123, record_stride=0.5, return_final=True)
    assert a[0] == b[0]
    assert a[1].to_csv() == b[1].to_csv()
    assert a[2] == b[2]


def test_batch_equals_single_runs():
    g = cycle(12)
    init = Configuration.single_ab(12, 0)
    seeds = replicate_seeds(5, 0, 40)
    kinds, times, events = run_batch(g, FitnessParams(3.0), init, seeds)
    for s, k, t, e in zip(seeds, kinds, times, events):
        out, _ = run(g, FitnessParams(3.0), init, int(s))
        assert (int(k), t, int(e)) == (["AbsorbedA", "AbsorbedB", "Timeout"].index(out.kind.value),
                                       out.absorption_time, out.events_executed)


def test_first_event_replays_from_random_source():
    # K_2 from (A, AB): the first interaction decides between (A, A) and (AB, AB)
    g = complete(2)
    pr = derive(FitnessParams(6.0))
    for seed in range(50):
        out, _, final = run(g, FitnessParams(6.0), Configuration.from_states([A, AB]), seed,
                            max_events=1, return_final=True)
        gap, _ = RandomSource(seed).global_draw(0)
        _, mark = RandomSource(seed).edge_draw(0, 0)
        assert out.absorption_time == pytest.approx(gap, rel=1e-15)
        expect = [A, A] if mark < 1 - pr.q_B else [AB, AB]
        assert final == Configuration.from_states(expect)


def test_first_event_distribution_on_k2():
    phi = 6.0
    pr = derive(FitnessParams(phi))
    n = 50_000
    kinds, _, _ = run_batch(complete(2), FitnessParams(phi), Configuration.from_states([A, AB]),
                            replicate_seeds(2, 0, n), max_events=1)
    freq = np.mean(kinds == KIND_A)
    p = 1 - pr.q_B
    assert abs(freq - p) <= 4 * np.sqrt(p * (1 - p) / n)
    assert np.all((kinds == KIND_A) | (kinds == KIND_TIMEOUT))


def test_trajectory_csv_shape():
    g = cycle(8)
    out, traj = run(g, FitnessParams(2.0), Configuration.single_ab(8, 0), 4, record_stride=0.25)
    lines = traj.to_csv().splitlines()
    assert lines[0] == "t,n_A,n_B,n_AB"
    assert np.all(np.diff(traj.t) > 0)
    assert np.all(traj.n_A + traj.n_B + traj.n_AB == 8)
    assert traj.t[-1] == out.absorption_time


def test_timeout_reported():
    out, _ = run(cycle(30), FitnessParams(1.0), Configuration.single_ab(30, 0), 0, max_events=3)
    assert out.kind in (Outcome.TIMEOUT, Outcome.ABSORBED_B)
    assert out.events_executed <= 3


# -- coupling -------------------------------------------------------------------------

small_graphs = st.sampled_from([cycle(6), path(5), complete(4), torus2d(3)])


@settings(max_examples=60)
@given(small_graphs, st.floats(0.2, 8.0), st.integers(0, 2**32), st.data())
def test_coupling_preserves_order(g, phi, seed, data):
    lo = data.draw(st.lists(st.integers(0, 2), min_size=g.n_vertices, max_size=g.n_vertices))
    down = data.draw(st.lists(st.integers(0, 2), min_size=g.n_vertices, max_size=g.n_vertices))
    hi = np.minimum(lo, down)
    rep = run_coupled(g, FitnessParams(phi), Configuration.from_states(hi), Configuration.from_states(lo), seed)
    assert rep.held and rep.n_violations == 0
    assert is_ordered(rep.final_hi, rep.final_lo)


def test_identical_copies_stay_identical():
    g = torus2d(4)
    c = Configuration.single_ab(16, 5)
    rep = run_coupled(g, FitnessParams(2.0), c, c, seed=3)
    assert rep.final_hi == rep.final_lo
    assert np.count_nonzero(rep.joint_labels - np.diag(np.diag(rep.joint_labels))) == 0


def test_unordered_input_rejected():
    g = path(3)
    with pytest.raises(ValueError):
        run_coupled(g, FitnessParams(1.0), Configuration.from_states([B, A, A]),
                    Configuration.from_states([A, A, A]), 0)


def test_detector_catches_independent_marks():
    # decoupled marks must break the order somewhere; otherwise the check is vacuous
    g = cycle(10)
    hi = Configuration.from_states([A] * 5 + [B] * 5)
    lo = Configuration.from_states([A] * 4 + [B] * 6)
    found = any(not run_coupled(g, FitnessParams(1.0), hi, lo, s, _seed_lo=s + 1000).held for s in range(20))
    assert found


# -- supermartingale ------------------------------------------------------------------

def test_k2_hand_value():
    d = supermartingale_drift(Configuration.from_states([A, AB]), complete(2), FitnessParams(6.0), 0.5)
    assert d == pytest.approx(-4 / 19, abs=1e-12)


def _generator_oracle(states, g, params, a):
    # sum over edges and outcomes of rate * (M' - M), outcome laws from raw fitnesses
    raw = transition_probabilities(params)
    s = [State(int(x)) for x in states]

    def m(cfg):
        return a ** (sum(x == A for x in cfg) - sum(x == B for x in cfg))

    base = m(s)
    total = 0.0
    for u, v in g.edges:
        key = tuple(sorted((s[u], s[v])))
        if key not in raw:
            continue
        for (x, y), p in raw[key].items():
            new = list(s)
            if s[u] <= s[v]:
                new[u], new[v] = x, y
            else:
                new[u], new[v] = y, x
            total += p * (m(new) - base)
    return total


@settings(max_examples=80)
@given(st.sampled_from([cycle(5), path(4), complete(4), torus2d(3)]), st.floats(0.3, 12.0),
       st.floats(0.05, 1.0), st.data())
def test_drift_matches_generator_oracle(g, phi, a, data):
    states = data.draw(st.lists(st.integers(0, 2), min_size=g.n_vertices, max_size=g.n_vertices))
    got = supermartingale_drift(Configuration.from_states(states), g, FitnessParams(phi), a)
    want = _generator_oracle(states, g, FitnessParams(phi), a)
    assert got == pytest.approx(want, rel=1e-10, abs=1e-12)


def test_drift_argument_checks():
    c = Configuration.from_states([A, B])
    with pytest.raises(ValueError):
        supermartingale_drift(c, complete(2), FitnessParams(2.0), 1.5)
    with pytest.raises(ValueError):
        supermartingale_drift(c, complete(2), FitnessParams(2.0), 0.0)


def test_k2_exhaustive_drift_sign():
    for phi in (3.0, 4.0, 9.0):
        for x, y in itertools.product(State, repeat=2):
            d = supermartingale_drift(Configuration.from_states([x, y]), complete(2), FitnessParams(phi), 3 / phi)
            assert d <= 1e-12


def test_ab_ab_coefficient_changes_sign_at_nine():
    # with a = 3 / phi the AB-AB factor is (a^2 - 1) p_AB + (a^-2 - 1) p_BA, zero exactly at phi = 9
    def coef(phi):
        return drift_coefficients(derive(FitnessParams(phi)), 3 / phi)[(AB, AB)]

    assert coef(9.0) == pytest.approx(0.0, abs=1e-12)
    assert coef(8.5) < 0 < coef(9.5)
    assert coef(10.0) == pytest.approx(10 / 11 * (0.09 - 1) + 1 / 11 * (1 / 0.09 - 1), abs=1e-12)
