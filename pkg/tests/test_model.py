import numpy as np
import pytest
from hypothesis import given, strategies as st

from naming_game.model import (
    A, AB, B, A_FAVOURABLE, B_FAVOURABLE, LABELS, FitnessParams, State, derive,
    pair_transition, transition_probabilities,
)

phis = st.floats(min_value=1e-3, max_value=1e3)


def test_state_codes_and_parse():
    assert [int(s) for s in (A, AB, B)] == [0, 1, 2]
    assert State.parse("ab") is AB
    assert State.parse(2) is B
    with pytest.raises(ValueError):
        State.parse("C")


def test_params_validation():
    with pytest.raises(ValueError):
        FitnessParams(0.0)
    with pytest.raises(ValueError):
        FitnessParams(1.0, -2.0)
    assert FitnessParams(6.0, 2.0).phi == 3.0


def test_phi_one_values():
    pr = derive(FitnessParams(1.0))
    assert pr.q_A == pr.q_B == 0.25
    assert pr.r == 0.5
    assert np.all(pr.p == 0.5)


def test_phi_three_values():
    pr = derive(FitnessParams(3.0))
    assert pr.q_A == pytest.approx(0.5, abs=1e-15)
    assert pr.q_B == pytest.approx(0.1, abs=1e-15)
    assert pr.p_AB == pytest.approx(0.75, abs=1e-15)


@given(phis)
def test_closed_forms_match_raw_fitness(phi):
    pr = derive(FitnessParams(phi))
    raw = transition_probabilities(FitnessParams(phi))
    assert pr.q_A == pytest.approx(raw[(AB, B)][(AB, AB)], abs=1e-12)
    assert pr.q_B == pytest.approx(raw[(A, AB)][(AB, AB)], abs=1e-12)
    assert pr.p_AB == pytest.approx(raw[(AB, AB)][(A, A)], abs=1e-12)
    assert 0.5 - 1e-12 <= pr.r <= 1.0


@given(phis, st.floats(min_value=0.1, max_value=10))
def test_scale_invariance(phi, scale):
    a = derive(FitnessParams(phi))
    b = derive(FitnessParams(phi * scale, scale))
    assert b.q_A == pytest.approx(a.q_A, rel=1e-12)
    assert b.q_B == pytest.approx(a.q_B, rel=1e-12)


@given(phis)
def test_r_symmetry(phi):
    assert derive(FitnessParams(phi)).r == pytest.approx(derive(FitnessParams(1 / phi)).r, abs=1e-12)


@given(phis)
def test_threshold_ordering(phi):
    t_ab, t_pab, t_qa = derive(FitnessParams(phi)).thresholds()
    # q_A <= p_{A->B} <= 1 - q_B is what makes the coupling monotone
    assert t_qa <= t_pab + 1e-15
    assert t_pab <= t_ab + 1e-15


@given(st.sampled_from(list(State)), st.sampled_from(list(State)),
       st.floats(min_value=1e-9, max_value=1 - 1e-9), phis)
def test_transition_symmetric_in_order(x, y, u, phi):
    pr = derive(FitnessParams(phi))
    fwd = pair_transition(x, y, u, pr)
    rev = pair_transition(y, x, u, pr)
    assert (fwd.new_x, fwd.new_y) == (rev.new_y, rev.new_x)
    assert fwd.label == rev.label


def test_mark_out_of_range():
    with pytest.raises(ValueError):
        pair_transition(A, B, 1.0, derive(FitnessParams(2.0)))


@pytest.mark.parametrize("phi", [0.4, 1.0, 3.0, 7.5])
def test_kernel_frequencies_match_raw_oracle(phi):
    pr = derive(FitnessParams(phi))
    raw = transition_probabilities(FitnessParams(phi))
    rng = np.random.default_rng(11)
    us = rng.random(100_000)
    n = us.size
    for pair, outcomes in raw.items():
        hits = {}
        for u in us:
            o = pair_transition(pair[0], pair[1], u, pr)
            key = tuple(sorted((o.new_x, o.new_y)))
            hits[key] = hits.get(key, 0) + 1
        assert set(hits) <= set(outcomes)
        for out, p in outcomes.items():
            sd = np.sqrt(p * (1 - p) / n)
            assert abs(hits.get(out, 0) / n - p) <= 4 * sd + 1e-12


def test_labels_favourable_partition():
    assert A_FAVOURABLE.isdisjoint(B_FAVOURABLE)
    assert len(LABELS) == 10


@pytest.mark.parametrize("phi", [0.2, 1.0, 4.0])
def test_a_favourable_labels_never_lower_a(phi):
    # labels 2A..5A never turn an A into anything else nor create a B
    pr = derive(FitnessParams(phi))
    for x in State:
        for y in State:
            for u in np.linspace(1e-6, 1 - 1e-6, 401):
                o = pair_transition(x, y, u, pr)
                if o.label in A_FAVOURABLE:
                    for old, new in ((x, o.new_x), (y, o.new_y)):
                        assert new <= old
                if o.label in B_FAVOURABLE:
                    for old, new in ((x, o.new_x), (y, o.new_y)):
                        assert new >= old
