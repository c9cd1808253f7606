"""Hamiltonian form of the Lorentz force equation: RK4 integration, the a priori
speed bound rho and a closure check for variational minimizers."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SingularEncounter, SingularPoint
from .potentials import curl_from_jacobian, lipschitz_and_C
from .serialization import rows_to_csv


@dataclass(frozen=True)
class PhaseState:
    position: np.ndarray
    momentum: np.ndarray
    time: float

    @property
    def velocity(self):
        return self.momentum / math.sqrt(1.0 + float(self.momentum @ self.momentum))


def _rhs(pair, t, x, p):
    dq = p / math.sqrt(1.0 + float(p @ p))
    tt = np.array([t])
    xx = x[None, :]
    J = pair.jacobian_A(tt, xx)[0]
    E = -pair.dt_A(tt, xx)[0] - pair.grad_Phi(tt, xx)[0]
    dp = E + np.cross(dq, curl_from_jacobian(J))
    return dq, dp


def hamiltonian_rhs(pair, state):
    """(dq, dp) with dq = p / sqrt(1 + |p|^2) and dp = E + dq x B."""
    x = np.asarray(state.position, dtype=float)
    if pair.singular_set and pair.distance_to_singular(x[None, :])[0] <= 0:
        ball = min(pair.singular_set, key=lambda b: float(b.distance(x[None, :])[0]))
        raise SingularPoint(f"position {x.tolist()} lies in singular ball {ball}", ball)
    return _rhs(pair, float(state.time), x, np.asarray(state.momentum, dtype=float))


def integrate(pair, state0, t_end, steps, margin=0.0):
    """Classical fixed-step RK4 from ``state0`` over [t0, t0 + t_end].

    Returns the list of ``steps + 1`` states. Raises SingularEncounter
    (carrying the time of closest approach) if the orbit gets within
    ``margin`` of a singular ball or produces non-finite values.
    """
    h = t_end / steps
    t = float(state0.time)
    x = np.array(state0.position, dtype=float)
    p = np.array(state0.momentum, dtype=float)
    out = [PhaseState(x.copy(), p.copy(), t)]
    singular = bool(pair.singular_set)
    closest, t_closest = math.inf, t

    def check(xc, tc):
        nonlocal closest, t_closest
        if not singular:
            return
        d = float(pair.distance_to_singular(xc[None, :])[0])
        if d < closest:
            closest, t_closest = d, tc
        if d <= margin:
            raise SingularEncounter(f"orbit reached the singular set near t = {tc:.6g}", t_closest)

    for _ in range(steps):
        check(x, t)
        k1q, k1p = _rhs(pair, t, x, p)
        x2 = x + 0.5 * h * k1q
        check(x2, t + 0.5 * h)
        k2q, k2p = _rhs(pair, t + 0.5 * h, x2, p + 0.5 * h * k1p)
        x3 = x + 0.5 * h * k2q
        check(x3, t + 0.5 * h)
        k3q, k3p = _rhs(pair, t + 0.5 * h, x3, p + 0.5 * h * k2p)
        x4 = x + h * k3q
        check(x4, t + h)
        k4q, k4p = _rhs(pair, t + h, x4, p + h * k3p)
        x = x + h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
        p = p + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        t += h
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise SingularEncounter(f"non-finite state at t = {t:.6g}", t_closest)
        out.append(PhaseState(x.copy(), p.copy(), t))
    check(x, t)
    return out


def rho_from_C(C, T):
    return T * C / math.sqrt(1.0 + (T * C) ** 2)


def velocity_bound(pair, box=((-4.0, 4.0),) * 3, grid=(21, 21, 21, 16), estimate=None):
    """rho = T C / sqrt(1 + T^2 C^2), with C measured on the (box, grid) sample.

    Only meaningful without singularities; otherwise 1.0 is returned with a
    warning, meaning no bound is claimed.
    """
    if pair.singular_set:
        warnings.warn("singular set is non-empty; no speed bound is claimed", stacklevel=2)
        return 1.0
    if estimate is None:
        estimate = lipschitz_and_C(pair, box, grid)
    return rho_from_C(estimate.C, pair.period)


def initial_state(q):
    from .action import momentum

    return PhaseState(np.array(q.samples[0]), momentum(np.array(q.velocity[0])), 0.0)


def periodicity_residual(pair, q, steps_per_node=64, return_orbit=False):
    """Integrate one period from (q(0), p(0)) and measure how far the orbit
    misses its start: (|q_end - q_0| + |p_end - p_0|) / (1 + |p_0|)."""
    s0 = initial_state(q)
    orbit = integrate(pair, s0, q.period, steps_per_node * q.N)
    end = orbit[-1]
    res = (np.linalg.norm(end.position - s0.position) + np.linalg.norm(end.momentum - s0.momentum))
    res = float(res / (1.0 + np.linalg.norm(s0.momentum)))
    return (res, orbit) if return_orbit else res


def orbit_to_csv(orbit, stride=1):
    rows = [[s.time, *s.position, *s.momentum] for s in orbit[::stride]]
    if (len(orbit) - 1) % stride:
        s = orbit[-1]
        rows.append([s.time, *s.position, *s.momentum])
    return rows_to_csv(["t", "x1", "x2", "x3", "p1", "p2", "p3"], [[float(v) for v in r] for r in rows])
