"""Fitness parameters, vertex states and the single-edge transition kernel."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
from numba import njit


class State(IntEnum):
    """Vertex state. Codes follow the row order of the coupling table."""

    A = 0
    AB = 1
    B = 2

    @classmethod
    def parse(cls, s: "str | int | State") -> "State":
        if isinstance(s, str):
            try:
                return cls[s.strip().upper()]
            except KeyError:
                raise ValueError(f"unknown state {s!r}") from None
        return cls(int(s))


A, AB, B = State.A, State.AB, State.B

LABELS = ("1A", "2A", "2B", "3A", "3B", "4A", "4B", "5A", "5B", "6B")
# labels that create an A or remove a B
A_FAVOURABLE = frozenset({"2A", "3A", "4A", "5A"})
B_FAVOURABLE = frozenset({"2B", "3B", "4B", "5B"})


@dataclass(frozen=True)
class FitnessParams:
    phi_A: float
    phi_B: float = 1.0

    def __post_init__(self):
        if not (self.phi_A > 0 and self.phi_B > 0):
            raise ValueError(f"fitnesses must be positive, got {self.phi_A}, {self.phi_B}")

    @property
    def phi(self) -> float:
        return self.phi_A / self.phi_B

    @classmethod
    def from_ratio(cls, phi: float) -> "FitnessParams":
        return cls(float(phi), 1.0)


@dataclass(frozen=True)
class DerivedProbs:
    """Interaction probabilities as functions of ``phi = phi_A / phi_B``.

    ``p[X, Y]`` is the probability that the individual in state X is the
    speaker when talking to an individual in state Y (indexed by State codes).
    """

    phi: float
    phi_AB: float
    p: np.ndarray = field(repr=False)
    q_A: float
    q_B: float
    r: float

    @property
    def p_AB(self) -> float:
        """p_{A->B}."""
        return float(self.p[A, B])

    @property
    def p_BA(self) -> float:
        """p_{B->A}."""
        return float(self.p[B, A])

    def thresholds(self) -> np.ndarray:
        """(1 - q_B, p_{A->B}, q_A): the mark thresholds of the kernel."""
        return np.array([1.0 - self.q_B, self.p_AB, self.q_A])


def derive(params: FitnessParams) -> DerivedProbs:
    phi = params.phi
    # fitnesses normalised to phi_B = 1 so scaled inputs give identical floats
    fit = np.array([phi, 0.5 * (phi + 1.0), 1.0])
    p = fit[:, None] / (fit[:, None] + fit[None, :])
    p.setflags(write=False)
    q_A = phi / (phi + 3.0)
    q_B = 1.0 / (3.0 * phi + 1.0)
    return DerivedProbs(
        phi=phi, phi_AB=0.5 * (params.phi_A + params.phi_B), p=p,
        q_A=q_A, q_B=q_B, r=q_A + q_B,
    )


@njit(cache=True, nogil=True)
def transition(sx, sy, u, t_ab, t_pab, t_qa):
    """Apply one interaction to the pair (sx, sy) with mark u.

    Thresholds: t_ab = 1 - q_B, t_pab = p_{A->B}, t_qa = q_A.
    Returns (new_x, new_y, label index into LABELS).
    """
    swapped = sx > sy
    if swapped:
        a, b = sy, sx
    else:
        a, b = sx, sy
    if a == b:
        if a == 0:
            na, nb, lab = 0, 0, 0
        elif a == 2:
            na, nb, lab = 2, 2, 9
        elif u < t_pab:
            na, nb, lab = 0, 0, 5
        else:
            na, nb, lab = 2, 2, 6
    elif a == 0 and b == 1:
        if u < t_ab:
            na, nb, lab = 0, 0, 1
        else:
            na, nb, lab = 1, 1, 2
    elif a == 0:
        if u < t_pab:
            na, nb, lab = 0, 1, 3
        else:
            na, nb, lab = 1, 2, 4
    else:
        if u < t_qa:
            na, nb, lab = 1, 1, 7
        else:
            na, nb, lab = 2, 2, 8
    if swapped:
        return nb, na, lab
    return na, nb, lab


@dataclass(frozen=True)
class PairOutcome:
    new_x: State
    new_y: State
    label: str


def pair_transition(x, y, u: float, probs: DerivedProbs) -> PairOutcome:
    if not 0.0 < u < 1.0:
        raise ValueError(f"mark must lie in (0, 1), got {u}")
    t = probs.thresholds()
    nx, ny, lab = transition(int(State.parse(x)), int(State.parse(y)), float(u), t[0], t[1], t[2])
    return PairOutcome(State(nx), State(ny), LABELS[lab])


def transition_probabilities(params: FitnessParams) -> dict:
    """Outcome probabilities of one interaction, computed from raw fitnesses.

    Keys are unordered input pairs in canonical order; values map the
    canonical output pair to its probability.
    """
    fa, fb = params.phi_A, params.phi_B
    fab = 0.5 * (fa + fb)

    def sp(x, y):
        return x / (x + y)

    return {
        (A, B): {(A, AB): sp(fa, fb), (AB, B): sp(fb, fa)},
        (A, AB): {
            (A, A): sp(fa, fab) + sp(fab, fa) * sp(fa, fb),
            (AB, AB): sp(fab, fa) * sp(fb, fa),
        },
        (AB, B): {
            (B, B): sp(fb, fab) + sp(fab, fb) * sp(fb, fa),
            (AB, AB): sp(fab, fb) * sp(fa, fb),
        },
        (AB, AB): {(A, A): sp(fa, fb), (B, B): sp(fb, fa)},
    }
