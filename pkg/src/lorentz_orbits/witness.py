"""Explicit negative-action trajectories p = b - eps * g~ and their certificates.

Three routes to a point of negative action are implemented:

* ``phi_zero``: no scalar potential; I0(p) <= -eps ||g'||^2 (1 - eps (pi + M T) / pi).
* ``theorem2``: a base sequence |b_n| -> infinity along which Phi decays faster
  than the oscillation of A; the witness is built at the last base point.
* ``theorem3_flow``: a descent run from a constant at a maximum of the
  mean-value function where the electric field does not vanish.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import action as act
from .errors import (
    CertificateFailed,
    DegenerateOscillation,
    EquilibriumStart,
    FlowStalled,
    NoNonautonomousPoint,
    PreconditionViolated,
    SpeedCapExceeded,
)
from .potentials import TOL_ZERO, box_grid, fibonacci_sphere, lipschitz_and_C, tilde_A_L2, varphi
from .trajectory import PeriodicTrajectory, l2_norm, spectral_primitive, sup_speed

MODES = ("phi_zero", "theorem2", "theorem3_flow")
TOL_QUAD = 1e-6


@dataclass
class WitnessCertificate:
    base_point: np.ndarray
    epsilon: float
    g_curve: PeriodicTrajectory
    g_dot_L2_sq: float
    M_used: float
    action_value: float
    theoretical_bound: float
    negative: bool
    mode: str
    witness: PeriodicTrajectory = None
    bound_satisfied: bool = True
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "mode": self.mode,
            "base_point": np.asarray(self.base_point).tolist(),
            "epsilon": self.epsilon,
            "g_dot_L2_sq": self.g_dot_L2_sq,
            "M_used": self.M_used,
            "action_value": self.action_value,
            "theoretical_bound": self.theoretical_bound,
            "bound_satisfied": self.bound_satisfied,
            "negative": self.negative,
            "details": self.details,
            "g_curve": self.g_curve.to_dict() if self.g_curve is not None else None,
            "witness": self.witness.to_dict() if self.witness is not None else None,
        }


def default_candidates(half_width=4.0, points=17):
    return box_grid(((-half_width, half_width),) * 3, points)


def find_base_point(pair, candidates=None, n_t=64, tol_zero=TOL_ZERO):
    """Candidate maximising ||A~(., b)||_2; ties go to the smallest |b|, then
    lexicographic order."""
    cands = default_candidates() if candidates is None else np.asarray(candidates, dtype=float).reshape(-1, 3)
    if pair.singular_set:
        cands = cands[pair.distance_to_singular(cands) > 0]
    if len(cands) == 0:
        raise PreconditionViolated("no candidate base points outside the singular set")
    norms = tilde_A_L2(pair, cands, n_t)
    norms = np.where(np.isfinite(norms), norms, -np.inf)
    best = norms.max()
    if not best > tol_zero:
        raise NoNonautonomousPoint(
            f"||A~(., b)||_2 <= {tol_zero:g} at every candidate; A is autonomous on the grid"
        )
    tied = np.flatnonzero(norms >= best * (1 - 1e-12))
    order = sorted(tied, key=lambda i: (float(np.linalg.norm(cands[i])), *cands[i].tolist()))
    return cands[order[0]].copy()


def build_g(pair, b, N=1024, tol=1e-8, scheme="spectral"):
    """Primitive g of A~(., b) on the N-node grid and the samples of g' = A~.

    Returns ``(g, gdot)`` with g as a PeriodicTrajectory. The primitive is
    taken in Fourier space so that differentiating g recovers A~ exactly.
    """
    T = pair.period
    t = np.arange(N) * (T / N)
    vals = pair.A(t, np.asarray(b, dtype=float)[None, :])
    mean = vals.mean(axis=0)
    gdot = vals - mean
    scale = max(1.0, float(np.max(np.abs(vals))))
    if not l2_norm(gdot, T) > TOL_ZERO * scale:
        raise DegenerateOscillation("A~(., b) vanishes; no oscillation to build a witness from")
    if not np.all(np.abs(gdot.mean(axis=0)) <= tol * scale):
        raise DegenerateOscillation("oscillating part of A(., b) does not have zero mean")
    g_tilde = spectral_primitive(gdot, T)
    # anchor so that g(0) = 0 as for the primitive starting at t = 0
    g = g_tilde - g_tilde[0]
    return PeriodicTrajectory(g, T, scheme), gdot


def epsilon_threshold(M, T, mode="phi_zero"):
    if M < 0 or T <= 0:
        raise ValueError("need M >= 0 and T > 0")
    if mode == "phi_zero":
        return math.pi / (math.pi + M * T)
    if mode == "theorem2":
        return 1.0 / (3.0 + M * T / math.pi)
    raise ValueError(f"no epsilon threshold for mode {mode!r}")


def witness_trajectory(pair, b, epsilon, N=1024, g=None, scheme="spectral"):
    """p(t) = b - eps * g~(t); raises SpeedCapExceeded when p leaves K."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    b = np.asarray(b, dtype=float)
    if epsilon == 0:
        return PeriodicTrajectory.constant(b, N, pair.period, scheme)
    if g is None:
        g, gdot = build_g(pair, b, N, scheme=scheme)
    else:
        gdot = g.velocity
    gmax = float(np.max(np.linalg.norm(gdot, axis=1)))
    if epsilon * gmax > 1.0 + 1e-12:
        raise SpeedCapExceeded(f"eps * sup|g'| = {epsilon * gmax:.6f} > 1")
    g_tilde = g.samples - g.samples.mean(axis=0)
    return PeriodicTrajectory(b - epsilon * g_tilde, pair.period, g.scheme)


def local_box(b, margin):
    b = np.asarray(b, dtype=float)
    return tuple((float(c - margin), float(c + margin)) for c in b)


def _local_M(pair, b, g, box_points=21, time_points=16):
    g_tilde = g.samples - g.samples.mean(axis=0)
    margin = float(np.max(np.linalg.norm(g_tilde, axis=1))) + 1.0
    est = lipschitz_and_C(pair, local_box(b, margin), (box_points,) * 3 + (time_points,), include_phi=False)
    return est.M, est


def _phi_is_zero(pair, points, n_t=16):
    ts = pair.time_nodes(n_t)[:, None]
    return bool(np.max(np.abs(pair.Phi(ts, points[None]))) == 0.0)


def _choose_epsilon(threshold, gdot):
    gmax = float(np.max(np.linalg.norm(gdot, axis=1)))
    return min(0.5 * threshold, 1.0 / gmax)


def certify_lemma_negative(pair, candidates=None, N=1024, box_points=21, time_points=16, tol_quad=TOL_QUAD):
    """Build and check the phi_zero witness; raises CertificateFailed on failure."""
    cands = default_candidates() if candidates is None else np.asarray(candidates, dtype=float).reshape(-1, 3)
    if not _phi_is_zero(pair, cands):
        raise PreconditionViolated("phi_zero certificate requires Phi == 0")
    b = find_base_point(pair, cands)
    g, gdot = build_g(pair, b, N)
    M, est = _local_M(pair, b, g, box_points, time_points)
    T = pair.period
    thr = epsilon_threshold(M, T, "phi_zero")
    eps = _choose_epsilon(thr, gdot)
    p = witness_trajectory(pair, b, eps, N, g=g)
    value = act.action_value(p, pair)
    gsq = l2_norm(gdot, T) ** 2
    bound = -eps * gsq * (1.0 - eps * (math.pi + M * T) / math.pi)
    cert = WitnessCertificate(
        base_point=b, epsilon=eps, g_curve=g, g_dot_L2_sq=gsq, M_used=M, action_value=value,
        theoretical_bound=bound, negative=value < 0, mode="phi_zero", witness=p,
        bound_satisfied=bool(value <= bound + tol_quad),
        details={"epsilon_threshold": thr, "M_box": est.box, "M_grid": list(est.grid), "N": N,
                 "tol_quad": tol_quad, "sup_speed": sup_speed(p)},
    )
    if not (cert.negative and cert.bound_satisfied and bound < 0):
        raise CertificateFailed(
            f"phi_zero witness failed: I0(p) = {value:.6e}, bound = {bound:.6e}"
        )
    return cert


def shell_grad_max(pair, radius, n_dirs=256, n_t=32, extra=(1.0, 2.0)):
    """Sampled max |grad Phi| over |y| >= radius (radius, radius*extra shells)."""
    dirs = fibonacci_sphere(n_dirs)
    ts = pair.time_nodes(n_t)[:, None]
    best = 0.0
    for f in extra:
        r = max(radius, 0.0) * f
        pts = r * dirs if r > 0 else np.zeros((1, 3))
        pts = pts[pair.distance_to_singular(pts) > 0]
        if len(pts) == 0:
            return math.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.linalg.norm(pair.grad_Phi(ts, pts[None]), axis=-1)
        best = max(best, float(np.max(g)))
    return best


@dataclass
class RatioRow:
    n: int
    radius: float
    r1: float
    r2: float


def _decreasing(vals):
    vals = np.asarray(vals, dtype=float)
    if np.all(vals == 0):
        return True
    return bool(np.all(np.diff(vals) < 0))


def certify_theorem2(pair, base_sequence, N=1024, n_dirs=256, box_points=21, time_points=16):
    """Ratio table for the decay conditions along ``base_sequence`` and the
    witness certificate at its last point.

    Returns ``(rows, certificate, trend_ok)``; a non-decreasing trend is
    reported through ``trend_ok`` and ``certificate.details``.
    """
    bs = np.asarray(base_sequence, dtype=float).reshape(-1, 3)
    if pair.singular_set and np.any(pair.distance_to_singular(bs) <= 0):
        raise PreconditionViolated("base points must lie outside the singular set")
    T = pair.period
    rows = []
    for n, b in enumerate(bs):
        a2 = float(tilde_A_L2(pair, b[None, :], 256)[0])
        if not a2 > TOL_ZERO:
            raise NoNonautonomousPoint(f"A~(., b_{n}) vanishes at b = {b.tolist()}")
        phi = float(varphi(pair, b[None, :], 256)[0])
        gmax = shell_grad_max(pair, np.linalg.norm(b) - T, n_dirs)
        rows.append(RatioRow(n=n, radius=float(np.linalg.norm(b)), r1=abs(phi) / a2**2, r2=gmax / a2))
    trend_ok = _decreasing([r.r1 for r in rows]) and _decreasing([r.r2 for r in rows])

    b = bs[-1]
    g, gdot = build_g(pair, b, N)
    M, est = _local_M(pair, b, g, box_points, time_points)
    thr = epsilon_threshold(M, T, "theorem2")
    eps = _choose_epsilon(thr, gdot)
    p = witness_trajectory(pair, b, eps, N, g=g)
    value = act.action_value(p, pair)
    gsq = l2_norm(gdot, T) ** 2
    phi_b = float(varphi(pair, b[None, :], N)[0])
    bound = -eps * gsq * (1.0 - eps * (2 * math.pi + M * T) / math.pi) - phi_b
    cert = WitnessCertificate(
        base_point=b, epsilon=eps, g_curve=g, g_dot_L2_sq=gsq, M_used=M, action_value=value,
        theoretical_bound=bound, negative=value < 0, mode="theorem2", witness=p,
        bound_satisfied=bool(value <= bound + TOL_QUAD),
        details={"epsilon_threshold": thr, "trend_ok": trend_ok, "phi_b": phi_b, "M_box": est.box,
                 "M_grid": list(est.grid), "N": N, "shell_dirs": n_dirs,
                 "shell_radii": "|b|-T, |b|, 2|b|"},
    )
    return rows, cert, trend_ok


def certify_theorem3_flow(pair, b0, N=64, max_flow_steps=200, tol_zero=1e-8, step_init=None,
                          beta=0.5, c1=1e-4, rho_cap=act.RHO_CAP):
    """Descend from the constant trajectory b0 until the action turns negative.

    Plain explicit-Euler steps on the Euclidean gradient of the discrete
    action with Armijo backtracking; the value log is kept in
    ``details['history']``.
    """
    b0 = np.asarray(b0, dtype=float)
    T = pair.period
    phi0 = float(varphi(pair, b0[None, :], N)[0])
    if phi0 < -tol_zero:
        raise PreconditionViolated(f"phi(b0) = {phi0:.3e} < 0: b0 is not a maximum point of phi")
    x = PeriodicTrajectory.constant(b0, N, T)
    value = act.action_value(x, pair)
    grad = act.grad_action(x, pair, rho_cap)
    gnorm = float(np.linalg.norm(grad))
    if not gnorm > tol_zero * x.h:
        raise EquilibriumStart(f"gradient norm {gnorm:.3e} at the constant b0: the field vanishes there")
    eta0 = (1.0 / x.h) if step_init is None else step_init
    history = [value]
    accepted = 0
    while accepted < max_flow_steps and value >= -tol_zero:
        g2 = float(np.sum(grad * grad))
        eta = eta0
        for _ in range(60):
            trial = x.with_samples(x.samples - eta * grad)
            if sup_speed(trial) <= rho_cap:
                tv = act.action_value(trial, pair)
                if tv <= value - c1 * eta * g2:
                    break
            eta *= beta
        else:
            raise FlowStalled("backtracking failed to find a descent step")
        x, value = trial, tv
        history.append(value)
        accepted += 1
        grad = act.grad_action(x, pair, rho_cap)
    if value >= -tol_zero:
        raise FlowStalled(f"no negative action within {max_flow_steps} steps (I = {value:.3e})")
    return WitnessCertificate(
        base_point=b0, epsilon=0.0, g_curve=None, g_dot_L2_sq=float("nan"), M_used=float("nan"),
        action_value=value, theoretical_bound=-phi0, negative=value < 0, mode="theorem3_flow", witness=x,
        details={"steps": accepted, "history": history, "phi_b0": phi0, "N": N,
                 "flow": "euclidean gradient of the discretised action"},
    )


@dataclass
class DivergenceRow:
    base_point: list
    radius: float
    g_dot_L2_sq: float
    g_dot_sup: float
    ratio: float
    epsilon: float
    action_value: float
    closed_form_bound: float


def divergence_probe(pair, approach_points, N=1024, M=0.0):
    """Witness with eps = 1/sup|g'| at each approach point.

    Returns ``(rows, monotone)`` where ``monotone`` is True when the action
    strictly decreases along the approach. ``M`` enters only the tabulated
    closed-form bound.
    """
    T = pair.period
    rows = []
    for b in np.asarray(approach_points, dtype=float).reshape(-1, 3):
        g, gdot = build_g(pair, b, N)
        gsq = l2_norm(gdot, T) ** 2
        gsup = float(np.max(np.linalg.norm(gdot, axis=1)))
        eps = 1.0 / gsup
        p = witness_trajectory(pair, b, eps, N, g=g)
        value = act.action_value(p, pair, tol_speed=1e-9)
        ratio = gsq / gsup
        bound = -ratio * (1.0 - (math.pi + M * T) / (math.pi * gsup))
        rows.append(DivergenceRow(base_point=b.tolist(), radius=float(np.linalg.norm(b)), g_dot_L2_sq=gsq,
                                  g_dot_sup=gsup, ratio=ratio, epsilon=eps, action_value=value,
                                  closed_form_bound=bound))
    vals = [r.action_value for r in rows]
    monotone = bool(all(b < a for a, b in zip(vals, vals[1:])))
    return rows, monotone
