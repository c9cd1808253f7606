"""Projected descent on the discretised action over K intersected with Lambda."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import action as act
from . import witness as wit
from .errors import (
    AllStartsFailed,
    BoundaryOfK,
    LineSearchFailed,
    LorentzOrbitsError,
    NoNonautonomousPoint,
    ProjectionStalled,
    SingularTrajectory,
)
from .trajectory import PeriodicTrajectory, in_Lambda, lambda_distance, random_trajectory, sup_speed

START_MODES = ("witness", "constant", "random", "custom")


@dataclass
class MinimizeConfig:
    grid_size: int = 256
    max_iters: int = 4000
    step_init: float = 1.0
    beta: float = 0.5
    c1: float = 1e-4
    grad_tol: float = 1e-9
    rho_cap: float = act.RHO_CAP
    lambda_margin: float = 1e-6
    multistart_seeds: tuple = (0,)
    start_mode: str = "witness"
    residual_tol: float = 1e-3
    tol_zero: float = 1e-10
    rho_tol: float = 1e-6
    preconditioner: str = "sobolev"
    max_halvings: int = 60
    box: tuple = ((-4.0, 4.0),) * 3
    box_grid: tuple = (21, 21, 21, 16)
    random_speed: float = 0.5

    def __post_init__(self):
        if self.grid_size < 8 or self.grid_size % 2:
            raise ValueError("grid_size must be even and >= 8")
        if not 0 < self.rho_cap < 1:
            raise ValueError("rho_cap must lie in (0, 1)")
        if not 0 < self.beta < 1 or not 0 < self.c1 < 1:
            raise ValueError("beta and c1 must lie in (0, 1)")
        for name in ("step_init", "grad_tol", "lambda_margin", "residual_tol", "tol_zero"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.start_mode not in START_MODES:
            raise ValueError(f"start_mode must be one of {START_MODES}")
        if self.preconditioner not in ("sobolev", "none"):
            raise ValueError("preconditioner must be 'sobolev' or 'none'")
        self.multistart_seeds = tuple(int(s) for s in self.multistart_seeds)

    def to_dict(self):
        return asdict(self)


@dataclass
class MinimizerResult:
    trajectory: PeriodicTrajectory
    action_report: act.ActionReport
    iterates_summary: list
    certification: dict
    rho_bound: float
    start: str = ""
    seed: Optional[int] = None
    converged: bool = False
    start_value: float = math.nan
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "certification": self.certification,
            "rho_bound": self.rho_bound,
            "action_report": self.action_report,
            "start": self.start,
            "seed": self.seed,
            "converged": self.converged,
            "start_value": self.start_value,
            "iterations": len(self.iterates_summary) - 1,
            "details": self.details,
            "trajectory": self.trajectory.to_dict(),
        }


def _clip_increments(d, h, cap, tol, max_sweeps):
    speed = np.linalg.norm(d, axis=1) / h
    for _ in range(max_sweeps):
        over = speed > cap
        d = d.copy()
        d[over] *= (cap / speed[over])[:, None]
        d -= d.mean(axis=0)
        speed = np.linalg.norm(d, axis=1) / h
        if speed.max() <= cap * (1 + tol):
            return d
    return d * (cap / speed.max())


def project_K(q, rho_cap, tol=1e-12, max_sweeps=16):
    """Clip chord speeds |q_{i+1} - q_i| / h to ``rho_cap`` keeping the mean.

    Increments above the cap are scaled onto it, then all increments are
    shifted by their average so the polygon closes again. If ``max_sweeps``
    such sweeps leave a small overshoot, one uniform rescaling of the
    increments removes it; this keeps their sum at zero. The clip aims a
    hair below the cap so that rounding in the rebuilt positions stays inside.
    """
    x = q.samples
    h = q.h
    d0 = np.roll(x, -1, axis=0) - x
    if np.linalg.norm(d0, axis=1).max() / h <= rho_cap:
        return q
    shrink = 4 * tol
    for _ in range(8):
        d = _clip_increments(d0, h, rho_cap * (1 - shrink), tol, max_sweeps)
        if not np.all(np.isfinite(d)):
            raise ProjectionStalled("non-finite increments during projection")
        y = np.concatenate([np.zeros((1, 3)), np.cumsum(d[:-1], axis=0)])
        y += x.mean(axis=0) - y.mean(axis=0)
        got = np.linalg.norm(np.roll(y, -1, axis=0) - y, axis=1).max() / h
        if got <= rho_cap * (1 + tol):
            return q.with_samples(y)
        shrink *= 10
    raise ProjectionStalled(f"chord speed {got:.6f} still above cap {rho_cap} after rounding repair")


def _precondition(grad, q, kind):
    if kind == "none":
        return grad
    N, T = q.N, q.period
    w = 2 * np.pi * np.fft.rfftfreq(N, d=T / N)
    sigma = (2 * np.pi / T) ** 2
    coef = np.fft.rfft(grad, axis=0) / (q.h * (sigma + w**2))[:, None]
    return np.fft.irfft(coef, n=N, axis=0)


def _feasible_value(q, pair, config):
    """I(q), or +inf when q violates the speed cap or the Lambda margin."""
    if sup_speed(q) > config.rho_cap:
        return math.inf
    if pair.singular_set and not in_Lambda(q, pair, config.lambda_margin):
        return math.inf
    return act.action_value(q, pair, dist_min=config.lambda_margin)


def line_search(q, direction, pair, config, grad=None, value=None):
    """Backtracking over eta in {step_init * beta^k} with a projected Armijo test.

    Returns ``(eta, new_q, new_value)``. Infeasible trial points count as +inf.
    """
    if grad is None:
        grad = direction
    if value is None:
        value = _feasible_value(q, pair, config)
    if not np.any(direction):
        return config.step_init, q, value
    eta = config.step_init
    for _ in range(config.max_halvings):
        trial = project_K(q.with_samples(q.samples - eta * direction), config.rho_cap)
        tv = _feasible_value(trial, pair, config)
        decrease = float(np.sum(grad * (trial.samples - q.samples)))
        if tv < value and tv <= value + config.c1 * decrease:
            return eta, trial, tv
        eta *= config.beta
    raise LineSearchFailed(f"no sufficient decrease after {config.max_halvings} halvings")


def projected_gradient_norm(q, direction, rho_cap):
    pg = q.samples - project_K(q.with_samples(q.samples - direction), rho_cap).samples
    return float(np.sqrt(q.h * np.sum(pg * pg)))


def descend(pair, start, config):
    """Run projected descent from ``start``.

    Returns ``(trajectory, value, log, converged, stop_reason)``; the log holds
    one ``(iter, I, projected-gradient norm, sup speed)`` tuple per iterate.
    """
    q = start
    value = _feasible_value(q, pair, config)
    if not math.isfinite(value):
        raise SingularTrajectory("start trajectory violates the speed cap or the Lambda margin")
    log = []
    converged = False
    reason = "max_iters"
    for it in range(config.max_iters + 1):
        grad = act.grad_action(q, pair, config.rho_cap, config.lambda_margin)
        direction = _precondition(grad, q, config.preconditioner)
        pgn = projected_gradient_norm(q, direction, config.rho_cap)
        log.append((it, value, pgn, sup_speed(q)))
        if pgn <= config.grad_tol:
            converged, reason = True, "grad_tol"
            break
        if it == config.max_iters:
            break
        try:
            _, q_new, v_new = line_search(q, direction, pair, config, grad=grad, value=value)
        except LineSearchFailed:
            reason = "line_search_stalled"
            break
        q, value = q_new, v_new
    return q, value, log, converged, reason


def make_start(pair, config, seed, custom=None):
    N, T = config.grid_size, pair.period
    mode = config.start_mode
    if mode == "custom":
        if custom is None:
            raise ValueError("start_mode 'custom' needs a start trajectory")
        return custom
    if mode == "witness":
        b = wit.find_base_point(pair)
    else:
        try:
            b = wit.find_base_point(pair)
        except NoNonautonomousPoint:
            b = np.zeros(3)
    if mode == "constant":
        return PeriodicTrajectory.constant(b, N, T)
    if mode == "random":
        rng = np.random.default_rng(seed)
        return random_trajectory(rng, N, T, max_speed=config.random_speed, n_modes=4, center=b)
    g, gdot = wit.build_g(pair, b, N)
    M, _ = wit._local_M(pair, b, g)
    eps = wit._choose_epsilon(wit.epsilon_threshold(M, T, "phi_zero"), gdot)
    return wit.witness_trajectory(pair, b, eps, N, g=g)


def certify(q, value, pair, config, rho_bound):
    report = act.action(q, pair, with_residual=True, rho_cap=config.rho_cap, dist_min=config.lambda_margin)
    osc = q.samples - q.samples.mean(axis=0)
    amp = float(np.max(np.linalg.norm(osc, axis=1)))
    res = report.el_residual_sup
    cert = {
        "non_constant": amp > 10 * config.grad_tol,
        "negative_action": value < -config.tol_zero,
        "el_residual_ok": res is not None and res <= config.residual_tol,
        "speed_below_rho": sup_speed(q) <= rho_bound + config.rho_tol,
        "oscillation_sup": amp,
        "el_residual": res,
        "sup_speed": sup_speed(q),
        "lambda_distance": lambda_distance(q, pair),
    }
    return report, cert


def minimize(pair, config=None, custom_start=None):
    """Multistart projected descent; returns the lowest-action MinimizerResult."""
    from .dynamics import velocity_bound

    config = config or MinimizeConfig()
    rho_bound = velocity_bound(pair, config.box, config.box_grid)
    seeds = config.multistart_seeds if config.start_mode == "random" else config.multistart_seeds[:1]
    results, failures = [], []
    for seed in seeds:
        try:
            start = make_start(pair, config, seed, custom_start)
            start_value = _feasible_value(start, pair, config)
            q, value, log, converged, reason = descend(pair, start, config)
        except (LorentzOrbitsError, BoundaryOfK) as exc:
            failures.append({"seed": seed, "error": f"{type(exc).__name__}: {exc}"})
            continue
        report, cert = certify(q, value, pair, config, rho_bound)
        results.append(MinimizerResult(
            trajectory=q, action_report=report, iterates_summary=log, certification=cert,
            rho_bound=rho_bound, start=config.start_mode, seed=seed, converged=converged,
            start_value=start_value,
            details={"stop_reason": reason, "failures": failures, "config": config.to_dict()},
        ))
    if not results:
        raise AllStartsFailed("every start failed", partial=failures)
    best = min(results, key=lambda r: r.action_report.total)
    best.details["starts"] = [(r.seed, r.action_report.total) for r in results]
    return best
