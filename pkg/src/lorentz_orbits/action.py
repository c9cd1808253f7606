"""Discrete relativistic action I = Psi + F on a uniform periodic grid.

Quadrature and differentiation share the trajectory's grid, so
``grad_action`` is the exact gradient of the number ``action`` returns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BoundaryOfK, SingularTrajectory
from .potentials import curl_from_jacobian
from .trajectory import TOL_SPEED, differentiate, in_Lambda, lambda_distance, sup_speed

RHO_CAP = 0.999


@dataclass
class ActionReport:
    psi: float
    f_term: Optional[float]
    total: float
    in_K: bool
    in_Lambda: bool
    el_residual_sup: Optional[float] = None

    @property
    def infinite(self):
        return math.isinf(self.total)


def psi(q, tol_speed=TOL_SPEED):
    """Relativistic kinetic term; +inf when the curve leaves K."""
    v = q.velocity
    s2 = np.sum(v * v, axis=1)
    if np.sqrt(s2.max()) > 1.0 + tol_speed:
        return math.inf
    return float(q.h * np.sum(1.0 - np.sqrt(np.maximum(0.0, 1.0 - s2))))


def _require_lambda(q, pair, dist_min):
    if pair.singular_set and not in_Lambda(q, pair, dist_min):
        raise SingularTrajectory(
            f"trajectory comes within {lambda_distance(q, pair):.3e} of the singular set"
        )


def f_term(q, pair, dist_min=None):
    """Integral of (q' . A(t, q) - Phi(t, q)) by the periodic trapezoid rule."""
    _require_lambda(q, pair, dist_min)
    t, x, v = q.times, q.samples, q.velocity
    integrand = np.sum(v * pair.A(t, x), axis=1) - pair.Phi(t, x)
    return float(q.h * np.sum(integrand))


def potential_term(q, pair, dist_min=None):
    """Just the vector-potential part: integral of q' . A(t, q)."""
    _require_lambda(q, pair, dist_min)
    return float(q.h * np.sum(q.velocity * pair.A(q.times, q.samples)))


def action(q, pair, with_residual=False, rho_cap=RHO_CAP, dist_min=None, tol_speed=TOL_SPEED):
    """Assemble Psi, F, I and the membership verdicts for ``q``."""
    inK = sup_speed(q) <= 1.0 + tol_speed
    inL = (not pair.singular_set) or in_Lambda(q, pair, dist_min)
    p = psi(q, tol_speed) if inK else math.inf
    f = f_term(q, pair, dist_min) if inL else None
    total = p + f if (inK and inL) else math.inf
    res = None
    if with_residual and inK and inL and sup_speed(q) <= rho_cap:
        res = el_residual(q, pair, rho_cap, dist_min)
    return ActionReport(psi=p, f_term=f, total=total, in_K=inK, in_Lambda=inL, el_residual_sup=res)


def action_value(q, pair, dist_min=None, tol_speed=TOL_SPEED):
    """Scalar I(q), +inf outside K or Lambda."""
    return action(q, pair, dist_min=dist_min, tol_speed=tol_speed).total


def _interior(q, pair, rho_cap, dist_min):
    s = sup_speed(q)
    if s > rho_cap:
        raise BoundaryOfK(f"sup speed {s:.6f} exceeds the interior cap {rho_cap}")
    _require_lambda(q, pair, dist_min)


def momentum(v):
    return v / np.sqrt(1.0 - np.sum(v * v, axis=-1))[..., None]


def grad_action(q, pair, rho_cap=RHO_CAP, dist_min=None):
    """Gradient of the discrete action with respect to every sample q_i.

    Both difference schemes are skew-adjoint on the periodic grid, so the
    adjoint of differentiation is minus differentiation.
    """
    _interior(q, pair, rho_cap, dist_min)
    t, x, v = q.times, q.samples, q.velocity
    mom = momentum(v)
    A_nodes = pair.A(t, x)
    J = pair.jacobian_A(t, x)
    kinetic_and_advection = -differentiate(mom + A_nodes, q.period, q.scheme)
    local = np.einsum("nik,ni->nk", J, v) - pair.grad_Phi(t, x)
    return q.h * (kinetic_and_advection + local)


def el_residual_nodes(q, pair, rho_cap=RHO_CAP, dist_min=None):
    """Pointwise defect d/dt(relativistic momentum) - E - q' x B."""
    _interior(q, pair, rho_cap, dist_min)
    t, x, v = q.times, q.samples, q.velocity
    dp = differentiate(momentum(v), q.period, q.scheme)
    E = -pair.dt_A(t, x) - pair.grad_Phi(t, x)
    B = curl_from_jacobian(pair.jacobian_A(t, x))
    return dp - E - np.cross(v, B)


def el_residual(q, pair, rho_cap=RHO_CAP, dist_min=None):
    return float(np.max(np.linalg.norm(el_residual_nodes(q, pair, rho_cap, dist_min), axis=1)))


def lower_bound_estimate(pair, radius, n_t=64, n_dirs=256, n_radii=16):
    """-T max |A| over the ball |x| <= radius (sampled), the crude floor for I on
    trajectories whose sup norm is at most ``radius``."""
    from .potentials import fibonacci_sphere

    dirs = fibonacci_sphere(n_dirs)
    rs = np.linspace(0.0, radius, n_radii)
    pts = (rs[:, None, None] * dirs[None]).reshape(-1, 3)
    ts = pair.time_nodes(n_t)[:, None]
    amax = float(np.max(np.linalg.norm(pair.A(ts, pts[None]), axis=-1)))
    return -pair.period * amax
