"""Arithmetic of the two-dimensional block construction.

Time is cut into windows of length T = sqrt(phi). An interaction is good when
its mark is below q_A, so good and bad interactions on one edge during one
window are independent Poisson variables with means q_A T and (1 - q_A) T.
The good event of a block asks, on four groups of edges:

1. at least two good interactions on each of 8 edges in the first window,
2. no bad interaction on each of 16 edges in the first window,
3. at least one good and no bad interaction on each of 8 edges in the second window,
4. no bad interaction on each of 16 edges over three windows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MULTIPLICITIES = (8, 16, 8, 16)
WINDOWS = (1, 1, 1, 3)  # in units of T


@dataclass(frozen=True)
class BlockParams:
    phi: float

    def __post_init__(self):
        if self.phi <= 0:
            raise ValueError("phi must be positive")

    @property
    def T(self) -> float:
        return math.sqrt(self.phi)

    @property
    def q_A(self) -> float:
        return self.phi / (self.phi + 3)


def interaction_rates(phi: float) -> tuple[float, float]:
    """Mean numbers of good and bad interactions per edge in one window of length T."""
    b = BlockParams(phi)
    return b.q_A * b.T, 3 * b.T / (phi + 3)


def block_bound(phi: float) -> float:
    """Union lower bound on P(good event), in its final closed form (may be negative)."""
    if phi <= 0:
        raise ValueError("phi must be positive")
    g = phi * math.sqrt(phi) / (phi + 3)
    return 1 - 8 * (2 + g) * math.exp(-g) - 216 * math.sqrt(phi) / (phi + 3)


def block_probability_exact(phi: float) -> float:
    """P(good event) when the 48 (edge, window) cells carry independent counts."""
    lg, lb = interaction_rates(phi)
    p_no_bad = math.exp(-lb)
    p_x_ge1 = -math.expm1(-lg)
    p_x_ge2 = p_x_ge1 - lg * math.exp(-lg)
    return (p_x_ge2**8 * p_no_bad**16 * (p_x_ge1 * p_no_bad) ** 8
            * math.exp(-3 * lb) ** 16)


def sample_good_event(phi: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo indicator of the good event, one entry per sample.

    Each cell draws its Poisson number of interactions over the window and
    thins it with uniform marks against q_A, as in the graphical construction.
    """
    b = BlockParams(phi)
    ok = np.ones(n, dtype=bool)
    for group, (m, w) in enumerate(zip(MULTIPLICITIES, WINDOWS)):
        total = rng.poisson(b.T * w, size=(n, m))
        good = rng.binomial(total, b.q_A)
        bad = total - good
        if group == 0:
            ok &= np.all(good >= 2, axis=1)
        elif group == 2:
            ok &= np.all((good >= 1) & (bad == 0), axis=1)
        else:
            ok &= np.all(bad == 0, axis=1)
    return ok


def is_eventually_increasing(lo: float = 3.0, hi: float = 1e12, n: int = 2000) -> bool:
    grid = np.geomspace(lo, hi, n)
    vals = np.array([block_bound(x) for x in grid])
    return bool(np.all(np.diff(vals) >= 0))


def min_phi_for(eps: float, lo: float = 1.0, hi: float = 1e12, rtol: float = 1e-3) -> float:
    """Smallest phi with block_bound(phi) >= 1 - eps, by bisection in log-space.

    Returns the upper end of the final bracket, so the bound holds there.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    target = 1 - eps
    if not is_eventually_increasing(max(lo, 3.0), hi):
        raise RuntimeError("block_bound is not increasing on the search range")
    if block_bound(hi) < target:
        raise ValueError(f"no phi <= {hi:g} reaches bound {target}")
    if block_bound(lo) >= target:
        return lo
    while hi / lo - 1 > rtol:
        mid = math.sqrt(lo * hi)
        if block_bound(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi
