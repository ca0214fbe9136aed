"""Well-mixed ODE approximation in the frequencies (u_A, u_B, u_AB)."""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.optimize import root

from .model import FitnessParams, derive

E_A = np.array([1.0, 0.0, 0.0])
E_B = np.array([0.0, 1.0, 0.0])
SIMPLEX_TOL = 1e-9
VERTEX_TOL = 1e-6


def _coefficients(params: FitnessParams):
    pr = derive(params)
    return 1 - 2 * pr.q_B, 1 - 2 * pr.q_A, pr.p_AB, pr.p_BA


def _field(u, c):
    k_a, k_b, p_ab, p_ba = c
    ua, ub, uab = u[..., 0], u[..., 1], u[..., 2]
    da = ua * uab * k_a - ua * ub * p_ba + 2 * uab * uab * p_ab
    db = ub * uab * k_b - ua * ub * p_ab + 2 * uab * uab * p_ba
    return np.stack([da, db, -(da + db)], axis=-1)


def check_simplex(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != 3:
        raise ValueError("state must have three components (u_A, u_B, u_AB)")
    if np.any(u < -SIMPLEX_TOL) or np.any(np.abs(u.sum(axis=-1) - 1) > SIMPLEX_TOL):
        raise ValueError(f"state {u} is not on the simplex")
    return u


def rhs(u, params: FitnessParams) -> np.ndarray:
    """Time derivative (u_A', u_B', u_AB'); accepts a single state or a stack."""
    return _field(check_simplex(u), _coefficients(params))


def difference_rhs(u, params: FitnessParams):
    """Closed form of (u_A - u_B)'."""
    u = check_simplex(u)
    phi = params.phi
    ua, ub, uab = u[..., 0], u[..., 1], u[..., 2]
    return ((3 * phi - 1) / (3 * phi + 1) * ua * uab
            + (phi - 3) / (phi + 3) * ub * uab
            + (phi - 1) / (phi + 1) * (ua * ub + 2 * uab * uab))


def jacobian(u, params: FitnessParams) -> np.ndarray:
    """Analytic Jacobian of the vector field at ``u`` (rows: u_A', u_B', u_AB')."""
    k_a, k_b, p_ab, p_ba = _coefficients(params)
    ua, ub, uab = np.asarray(u, dtype=float)
    ja = [uab * k_a - ub * p_ba, -ua * p_ba, ua * k_a + 4 * uab * p_ab]
    jb = [-ub * p_ab, uab * k_b - ua * p_ab, ub * k_b + 4 * uab * p_ba]
    j = np.array([ja, jb, [0.0, 0.0, 0.0]])
    j[2] = -(j[0] + j[1])
    return j


def jacobian_eB_eigenvalues(params: FitnessParams) -> tuple[float, float, float]:
    phi = params.phi
    return -1 / (phi + 1), 0.0, (phi - 3) / (phi + 3)


@dataclass
class Trajectory:
    t: np.ndarray
    u: np.ndarray
    limit: str  # "e_A", "e_B" or "undecided"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,u_A,u_B,u_AB\n")
        for ti, (a, b, c) in zip(self.t, self.u):
            buf.write(",".join(repr(float(v)) for v in (ti, a, b, c)) + "\n")
        return buf.getvalue()


def _classify(u):
    """0 = undecided, 1 = e_A, 2 = e_B, per row."""
    out = np.zeros(u.shape[0], dtype=np.int64)
    out[np.abs(u - E_A).max(axis=1) < VERTEX_TOL] = 1
    out[np.abs(u - E_B).max(axis=1) < VERTEX_TOL] = 2
    return out


_LIMITS = ("undecided", "e_A", "e_B")


def integrate_many(u0s, params: FitnessParams, dt: float = 1e-3, t_max: float = 200.0,
                   sample_dt: float | None = None, stop_on_convergence: bool = True):
    """Fixed-step RK4 for a stack of initial states, advanced together.

    Returns ``(times, states, limits)`` where ``states`` has shape
    (samples, n, 3); with ``sample_dt=None`` only the final state is kept.
    A row freezes once it is within 1e-6 (max-norm) of e_A or e_B.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    u = check_simplex(np.atleast_2d(np.array(u0s, dtype=float))).copy()
    c = _coefficients(params)
    n_steps = int(round(t_max / dt))
    every = None if sample_dt is None else max(1, int(round(sample_dt / dt)))
    times, samples = [0.0], [u.copy()]
    cls = _classify(u)
    step = 0
    while step < n_steps:
        if stop_on_convergence and np.all(cls > 0):
            break
        live = cls == 0 if stop_on_convergence else np.ones(u.shape[0], dtype=bool)
        x = u[live]
        k1 = _field(x, c)
        k2 = _field(x + 0.5 * dt * k1, c)
        k3 = _field(x + 0.5 * dt * k2, c)
        k4 = _field(x + dt * k3, c)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = np.abs(x.sum(axis=1) - 1)
        bad = drift > 1e-12
        if np.any(bad):
            y = np.clip(x[bad], 0.0, None)
            x[bad] = y / y.sum(axis=1, keepdims=True)
        u[live] = x
        cls = _classify(u)
        step += 1
        if every and step % every == 0:
            times.append(step * dt)
            samples.append(u.copy())
    if every is None or times[-1] != step * dt:
        times.append(step * dt)
        samples.append(u.copy())
    return np.array(times), np.stack(samples), [_LIMITS[k] for k in cls]


def integrate(u0, params: FitnessParams, dt: float = 1e-3, t_max: float = 200.0,
              sample_dt: float | None = 0.1) -> Trajectory:
    t, s, lim = integrate_many([u0], params, dt, t_max, sample_dt)
    return Trajectory(t, s[:, 0, :], lim[0])


@dataclass(frozen=True)
class FixedPoint:
    u: np.ndarray
    eigenvalues: np.ndarray  # of the field restricted to the simplex plane
    converged: bool

    @property
    def is_saddle(self) -> bool:
        ev = np.real(self.eigenvalues)
        return bool(ev.min() < 0 < ev.max())


def interior_fixed_point(params: FitnessParams, guess=(1 / 3, 1 / 3)) -> FixedPoint:
    """Locate an interior equilibrium from the centroid with Powell's hybrid method."""
    c = _coefficients(params)

    def reduced(x):
        u = np.array([x[0], x[1], 1 - x[0] - x[1]])
        return _field(u, c)[:2]

    sol = root(reduced, np.asarray(guess, dtype=float), method="hybr", tol=1e-14)
    ua, ub = sol.x
    u = np.array([ua, ub, 1 - ua - ub])
    # tangent coordinates (u_A, u_B) with u_AB eliminated
    j = jacobian(u, params)
    jt = np.array([[j[0, 0] - j[0, 2], j[0, 1] - j[0, 2]],
                   [j[1, 0] - j[1, 2], j[1, 1] - j[1, 2]]])
    # hybr may flag slow progress at this tolerance; the residual is the real test
    ok = bool(np.all(u > 0) and np.abs(reduced(sol.x)).max() < 1e-12)
    return FixedPoint(u, np.linalg.eigvals(jt), ok)
