import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from naming_game.blocks import (
    BlockParams, block_bound, block_probability_exact, interaction_rates, is_eventually_increasing,
    min_phi_for, sample_good_event,
)


def _union_bound(phi):
    # 1 minus the summed failure probabilities of the 48 cells, each bounded on its own
    lg, lb = interaction_rates(phi)
    fail = 8 * (1 + lg) * math.exp(-lg)          # fewer than two good interactions
    fail += 16 * lb                                # some bad interaction, first window
    fail += 8 * (math.exp(-lg) + lb)               # no good or some bad, second window
    fail += 16 * 3 * lb                            # some bad interaction over three windows
    return 1 - fail


@pytest.mark.parametrize("phi", [1.0, 9.0, 1e4, 1e6, 1e8, 1e10])
def test_bound_matches_cellwise_union(phi):
    assert block_bound(phi) == pytest.approx(_union_bound(phi), abs=1e-12)


def test_spot_values():
    assert block_bound(1e8) == pytest.approx(0.978400000648, abs=1e-11)
    assert block_probability_exact(1e8) == pytest.approx(0.97863161004903687, abs=1e-12)


@given(st.floats(0.5, 1e12))
def test_exact_dominates_bound(phi):
    assert block_probability_exact(phi) >= block_bound(phi) - 1e-12


def test_rates():
    lg, lb = interaction_rates(100.0)
    assert lg + lb == pytest.approx(BlockParams(100.0).T, rel=1e-15)
    assert lg == pytest.approx(10 * 100 / 103, rel=1e-15)


def test_min_phi():
    phi = min_phi_for(0.1)
    assert block_bound(phi) >= 0.9
    assert block_bound(phi / (1 + 1e-3)) < 0.9
    assert phi == pytest.approx(4.67e6, rel=2e-3)
    assert min_phi_for(0.5) < phi
    with pytest.raises(ValueError):
        min_phi_for(1.5)


def test_monotone_tail():
    assert is_eventually_increasing()


def test_monte_carlo_matches_product():
    phi, n = 1e6, 100_000
    p = block_probability_exact(phi)
    hits = sample_good_event(phi, n, np.random.default_rng(0))
    assert abs(hits.mean() - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_invalid_phi():
    with pytest.raises(ValueError):
        BlockParams(0.0)
    with pytest.raises(ValueError):
        block_bound(-1.0)


@pytest.mark.parametrize("phi", [10.0, 1e4, 1e8])
def test_product_against_grouped_form(phi):
    # 16 + 8 + 48 window-lengths of "no bad" exposure; 8 cells need two good, 8 need one
    lg, lb = interaction_rates(phi)
    want = math.exp(-72 * lb) * (1 - math.exp(-lg) * (1 + lg)) ** 8 * (1 - math.exp(-lg)) ** 8
    assert block_probability_exact(phi) == pytest.approx(want, rel=1e-12)
