"""Electromagnetic potential pairs (A, Phi) and the structural quantities
computed from them.

All potential callables follow one convention: ``f(t, x)`` with ``t`` of
shape ``(...)`` and ``x`` of shape ``(..., 3)``, broadcasting against each
other. Vector potentials return ``(..., 3)``, scalar potentials ``(...)``,
Jacobians ``(..., 3, 3)`` with ``J[..., i, j] = dA_i/dx_j``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import NonFinite, SingularPoint, UnboundedAbove

FD_REL_STEP = 1e-5
TOL_ZERO = 1e-10


@dataclass(frozen=True)
class SingularBall:
    center: tuple
    radius: float = 0.0

    def __post_init__(self):
        c = tuple(float(v) for v in self.center)
        if len(c) != 3:
            raise ValueError("singular ball center must be a point of R^3")
        if not self.radius >= 0:
            raise ValueError("singular ball radius must be >= 0")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    def distance(self, x):
        """Signed distance from ``x`` to the ball surface (<= 0 means inside)."""
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x - np.asarray(self.center), axis=-1) - self.radius


def _zero_vector(t, x):
    x = np.asarray(x, dtype=float)
    shape = np.broadcast_shapes(np.shape(t), x.shape[:-1])
    return np.zeros(shape + (3,))


def _zero_scalar(t, x):
    x = np.asarray(x, dtype=float)
    return np.zeros(np.broadcast_shapes(np.shape(t), x.shape[:-1]))


def _zero_matrix(t, x):
    x = np.asarray(x, dtype=float)
    shape = np.broadcast_shapes(np.shape(t), x.shape[:-1])
    return np.zeros(shape + (3, 3))


@dataclass(frozen=True, eq=False)
class PotentialPair:
    """A T-periodic potential pair with optional analytic derivatives.

    Missing derivatives are replaced by central differences with the
    scale-aware step ``1e-5 * max(1, |x|)``.
    """

    vector_potential: Callable
    scalar_potential: Callable
    period: float
    singular_set: tuple = ()
    analytic_jacobian_A: Optional[Callable] = None
    analytic_dt_A: Optional[Callable] = None
    analytic_grad_Phi: Optional[Callable] = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")
        balls = tuple(b if isinstance(b, SingularBall) else SingularBall(*b) for b in self.singular_set)
        object.__setattr__(self, "singular_set", balls)

    # -- raw evaluation (vectorised) ---------------------------------------
    def A(self, t, x):
        return np.asarray(self.vector_potential(t, x), dtype=float)

    def Phi(self, t, x):
        return np.asarray(self.scalar_potential(t, x), dtype=float)

    def dt_A(self, t, x):
        if self.analytic_dt_A is not None:
            return np.asarray(self.analytic_dt_A(t, x), dtype=float)
        t = np.asarray(t, dtype=float)
        h = FD_REL_STEP * np.maximum(1.0, np.abs(t))
        return (self.A(t + h, x) - self.A(t - h, x)) / (2 * h)[..., None]

    def jacobian_A(self, t, x):
        if self.analytic_jacobian_A is not None:
            return np.asarray(self.analytic_jacobian_A(t, x), dtype=float)
        return _fd_jacobian(self.A, t, x)

    def grad_Phi(self, t, x):
        if self.analytic_grad_Phi is not None:
            return np.asarray(self.analytic_grad_Phi(t, x), dtype=float)
        return _fd_gradient(self.Phi, t, x)

    def distance_to_singular(self, x):
        """Smallest signed distance to the singular set (inf if empty)."""
        x = np.asarray(x, dtype=float)
        if not self.singular_set:
            return np.full(x.shape[:-1], np.inf)
        return np.min([b.distance(x) for b in self.singular_set], axis=0)

    def time_nodes(self, n):
        return np.arange(n) * (self.period / n)


def _fd_steps(x):
    return FD_REL_STEP * np.maximum(1.0, np.linalg.norm(x, axis=-1))


def _fd_gradient(f, t, x):
    x = np.asarray(x, dtype=float)
    h = _fd_steps(x)
    cols = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        step = h[..., None] * e
        cols.append((f(t, x + step) - f(t, x - step)) / (2 * h))
    return np.stack(cols, axis=-1)


def _fd_jacobian(f, t, x):
    x = np.asarray(x, dtype=float)
    h = _fd_steps(x)
    cols = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        step = h[..., None] * e
        cols.append((f(t, x + step) - f(t, x - step)) / (2 * h)[..., None])
    return np.stack(cols, axis=-1)


def curl_from_jacobian(J):
    return np.stack(
        [J[..., 2, 1] - J[..., 1, 2], J[..., 0, 2] - J[..., 2, 0], J[..., 1, 0] - J[..., 0, 1]],
        axis=-1,
    )


def operator_norm(J):
    """Spectral norm of a stack of 3x3 matrices."""
    gram = np.einsum("...ki,...kj->...ij", J, J)
    return np.sqrt(np.maximum(np.linalg.eigvalsh(gram)[..., -1], 0.0))


# -- fields -------------------------------------------------------------------

@dataclass(frozen=True)
class FieldSample:
    electric: np.ndarray
    magnetic: np.ndarray
    at: tuple


def fields(pair, t, x):
    """Vectorised (E, B) without singular-set checks."""
    E = -pair.dt_A(t, x) - pair.grad_Phi(t, x)
    B = curl_from_jacobian(pair.jacobian_A(t, x))
    return E, B


def _check_regular(pair, x):
    for ball in pair.singular_set:
        if ball.distance(x) <= 0:
            raise SingularPoint(
                f"point {tuple(float(v) for v in np.round(x, 12))} lies in singular ball "
                f"center={ball.center} radius={ball.radius}",
                ball=ball,
            )


def eval_fields(pair, t, x):
    """Electric and magnetic field at a single point (t, x)."""
    x = np.asarray(x, dtype=float).reshape(3)
    _check_regular(pair, x)
    E, B = fields(pair, float(t), x)
    if not (np.all(np.isfinite(E)) and np.all(np.isfinite(B))):
        raise NonFinite(f"non-finite field at t={t}, x={tuple(x)}")
    return FieldSample(electric=E, magnetic=B, at=(float(t), tuple(x)))


# -- time averages --------------------------------------------------------------

def mean_A(pair, x, n_t=256):
    """Time average of A(., x) by the periodic trapezoid rule."""
    x = np.asarray(x, dtype=float)
    ts = pair.time_nodes(n_t).reshape((n_t,) + (1,) * (x.ndim - 1))
    return pair.A(ts, x[None, ...]).mean(axis=0)


def tilde_A(pair, t, x, n_t=256):
    x = np.asarray(x, dtype=float)
    return pair.A(t, x) - mean_A(pair, x, n_t)


def tilde_A_L2(pair, x, n_t=64):
    """||A~(., x)||_2 over one period, vectorised over the leading axes of x."""
    x = np.asarray(x, dtype=float)
    ts = pair.time_nodes(n_t).reshape((n_t,) + (1,) * (x.ndim - 1))
    vals = pair.A(ts, x[None, ...])
    osc = vals - vals.mean(axis=0)
    return np.sqrt(pair.period * np.mean(np.sum(osc**2, axis=-1), axis=0))


def varphi(pair, x, n_t=256):
    """Integral of Phi(., x) over one period; -inf inside the singular set."""
    x = np.asarray(x, dtype=float)
    ts = pair.time_nodes(n_t).reshape((n_t,) + (1,) * (x.ndim - 1))
    inside = pair.distance_to_singular(x) <= 0
    safe = np.where(inside[..., None], np.asarray(x) + 1e6, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = pair.Phi(ts, safe[None, ...]).mean(axis=0) * pair.period
    out = np.where(inside, -np.inf, vals)
    return out if out.ndim else float(out)


# -- gauge freedom ----------------------------------------------------------------

def fibonacci_sphere(n):
    """n nearly uniform unit vectors (Fibonacci lattice)."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = np.pi * (1.0 + 5**0.5) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def box_grid(box, resolution):
    """Uniform grid points over an axis-aligned box, shape (n, 3)."""
    if np.isscalar(resolution):
        resolution = (int(resolution),) * 3
    axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(box, resolution)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def normalize_phi(pair, sample_box=((-4, 4),) * 3, resolution=9,
                  probe_radii=(8.0, 16.0, 32.0, 64.0, 128.0), probe_dirs=64, n_t=256):
    """Gauge-equivalent pair whose mean-value function has supremum 0.

    The supremum is estimated over a uniform grid on ``sample_box`` plus
    far-field probe shells; the shift applied is recorded in
    ``params['phi_shift']``.
    """
    grid = box_grid(sample_box, resolution)
    dirs = fibonacci_sphere(probe_dirs)
    shells = np.array([varphi(pair, r * dirs, n_t) for r in probe_radii])
    shell_max = shells.max(axis=1)
    steps = np.diff(shell_max)
    if len(steps) >= 2 and np.all(steps > TOL_ZERO) and steps[-1] >= 0.9 * steps[-2]:
        raise UnboundedAbove(
            f"mean-value function keeps growing along the far-field probes: {shell_max.tolist()}"
        )
    values = np.concatenate([np.atleast_1d(varphi(pair, grid, n_t)), shells.ravel()])
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        raise UnboundedAbove("no finite mean-value samples")
    sup = float(finite.max())
    shift = sup / pair.period
    if shift == 0.0:
        return pair
    base = pair.scalar_potential

    def shifted(t, x):
        return base(t, x) - shift

    params = dict(pair.params)
    params["phi_shift"] = params.get("phi_shift", 0.0) + shift
    return replace(pair, scalar_potential=shifted, params=params)


@dataclass(frozen=True, eq=False)
class GaugeFunction:
    """A scalar gauge function f(t, x) and whichever derivatives are known.

    ``hess`` and ``dt_grad`` are only needed to keep the transformed pair's
    derivatives analytic; without them finite differences are used.
    """

    f: Callable
    dt: Optional[Callable] = None
    grad: Optional[Callable] = None
    hess: Optional[Callable] = None
    dt_grad: Optional[Callable] = None
    label: str = ""

    def dt_value(self, t, x):
        if self.dt is not None:
            return np.asarray(self.dt(t, x), dtype=float)
        t = np.asarray(t, dtype=float)
        h = FD_REL_STEP * np.maximum(1.0, np.abs(t))
        return (self.f(t + h, x) - self.f(t - h, x)) / (2 * h)

    def grad_value(self, t, x):
        if self.grad is not None:
            return np.asarray(self.grad(t, x), dtype=float)
        return _fd_gradient(self.f, t, x)


def check_gauge_periodic(f, period, points, tol=1e-9):
    points = np.asarray(points, dtype=float)
    return bool(np.max(np.abs(f.f(0.0, points) - f.f(period, points))) <= tol)


def gauge_transform(pair, f):
    """Return (Phi + df/dt, A - grad f); fields are unchanged."""
    A0, Phi0 = pair.vector_potential, pair.scalar_potential

    def new_A(t, x):
        return A0(t, x) - f.grad_value(t, x)

    def new_Phi(t, x):
        return Phi0(t, x) + f.dt_value(t, x)

    jac = dtA = gPhi = None
    if pair.analytic_jacobian_A is not None and f.hess is not None:
        J0 = pair.analytic_jacobian_A

        def jac(t, x):
            return J0(t, x) - f.hess(t, x)

    if pair.analytic_dt_A is not None and f.dt_grad is not None:
        d0 = pair.analytic_dt_A

        def dtA(t, x):
            return d0(t, x) - f.dt_grad(t, x)

    if pair.analytic_grad_Phi is not None and f.dt_grad is not None:
        g0 = pair.analytic_grad_Phi

        def gPhi(t, x):
            return g0(t, x) + f.dt_grad(t, x)

    return replace(
        pair,
        vector_potential=new_A,
        scalar_potential=new_Phi,
        analytic_jacobian_A=jac,
        analytic_dt_A=dtA,
        analytic_grad_Phi=gPhi,
        name=f"{pair.name}+gauge",
        params={**pair.params, "gauge": f.label},
    )


# -- admissibility audit ------------------------------------------------------------

@dataclass
class AdmissibilityReport:
    nonzero_electric_field: bool
    nonautonomous_A: bool
    decay_A_profile: list
    decay_Phi_profile: list
    coulomb_minorant_ok: list
    coulomb_fitted_r: list
    phi_sup_estimate: float
    max_electric_proxy: float
    grid: dict

    @property
    def admissible(self):
        return self.nonzero_electric_field and all(self.coulomb_minorant_ok)


def _regular_mask(pair, x, margin=0.0):
    return pair.distance_to_singular(x) > margin


def admissibility_report(pair, radii=(2.0, 4.0, 8.0, 16.0), samples_per_sphere=64, n_t=32,
                         probe_box=((-4, 4),) * 3, probe_resolution=9, tol_zero=TOL_ZERO,
                         shell_offsets=(1e-3, 1e-2, 1e-1)):
    """Sample-based audit of the admissible-class conditions."""
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and strictly increasing")
    ts = pair.time_nodes(n_t)
    dirs = fibonacci_sphere(samples_per_sphere)

    grid = box_grid(probe_box, probe_resolution)
    grid = grid[_regular_mask(pair, grid, 1e-6)]
    tt = ts[:, None]
    xx = grid[None, :, :]
    dtA = pair.dt_A(tt, xx)
    with np.errstate(divide="ignore", invalid="ignore"):
        gP = pair.grad_Phi(tt, xx)
    e_proxy = np.linalg.norm(dtA + gP, axis=-1)
    e_proxy = e_proxy[np.isfinite(e_proxy)]
    max_e = float(e_proxy.max()) if e_proxy.size else 0.0
    max_dtA = float(np.nanmax(np.linalg.norm(dtA, axis=-1))) if dtA.size else 0.0

    decay_A, decay_P = [], []
    for r in radii:
        pts = r * dirs
        pts = pts[_regular_mask(pair, pts, 1e-6)]
        if len(pts) == 0:
            decay_A.append((r, float("nan")))
            decay_P.append((r, float("nan")))
            continue
        d = np.linalg.norm(pair.dt_A(tt, pts[None]), axis=-1) + operator_norm(pair.jacobian_A(tt, pts[None]))
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.linalg.norm(pair.grad_Phi(tt, pts[None]), axis=-1)
        decay_A.append((r, float(np.max(d))))
        decay_P.append((r, float(np.max(g))))

    ok, fitted = [], []
    for ball in pair.singular_set:
        c = np.asarray(ball.center)
        vals = []
        for off in shell_offsets:
            pts = c + (ball.radius + off) * dirs
            pts = pts[_regular_mask(pair, pts, 0.0)]
            if len(pts) == 0:
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                phi = pair.Phi(tt, pts[None])
            dist = ball.distance(pts)[None, :]
            vals.append(np.min(-phi * dist))
        r_fit = float(np.min(vals)) if vals else float("nan")
        fitted.append(r_fit)
        ok.append(bool(np.isfinite(r_fit) and r_fit > tol_zero))

    phi_vals = np.atleast_1d(varphi(pair, grid, 64))
    phi_vals = phi_vals[np.isfinite(phi_vals)]
    return AdmissibilityReport(
        nonzero_electric_field=max_e > tol_zero,
        nonautonomous_A=max_dtA > tol_zero,
        decay_A_profile=decay_A,
        decay_Phi_profile=decay_P,
        coulomb_minorant_ok=ok,
        coulomb_fitted_r=fitted,
        phi_sup_estimate=float(phi_vals.max()) if phi_vals.size else float("nan"),
        max_electric_proxy=max_e,
        grid={
            "radii": radii,
            "samples_per_sphere": samples_per_sphere,
            "time_nodes": n_t,
            "probe_box": [list(map(float, b)) for b in probe_box],
            "probe_resolution": probe_resolution,
            "tol_zero": tol_zero,
        },
    )


# -- Lipschitz constant and field bound ------------------------------------------------

@dataclass
class LipschitzEstimate:
    """Grid suprema of the spatial Jacobian of A and of the field sources.

    ``C`` uses the operator norm of grad A; ``C_det`` keeps the determinant
    variant for comparison.
    """

    M: float
    C: float
    C_det: float
    max_dt_A: float
    max_grad_Phi: float
    box: list
    grid: tuple

    def __iter__(self):
        yield self.M
        yield self.C


def lipschitz_and_C(pair, box=((-4, 4),) * 3, grid=(21, 21, 21, 16), include_phi=True, chunk=200_000):
    """Estimate M = sup ||grad A||_op and C = max(|dA/dt|, M, |grad Phi|) on a grid."""
    nx, ny, nz, nt = grid
    pts = box_grid(box, (nx, ny, nz))
    ts = pair.time_nodes(nt)
    M = dt_max = gp_max = det_max = 0.0
    per = max(1, chunk // nt)
    for start in range(0, len(pts), per):
        x = pts[start:start + per][None, :, :]
        tt = ts[:, None]
        J = pair.jacobian_A(tt, x)
        dA = pair.dt_A(tt, x)
        vals = [J, dA]
        if include_phi:
            with np.errstate(divide="ignore", invalid="ignore"):
                gP = pair.grad_Phi(tt, x)
            vals.append(gP)
        if not all(np.all(np.isfinite(v)) for v in vals):
            raise NonFinite("non-finite derivative on the supremum grid; exclude singular balls from the box")
        M = max(M, float(operator_norm(J).max()))
        det_max = max(det_max, float(np.abs(np.linalg.det(J)).max()))
        dt_max = max(dt_max, float(np.linalg.norm(dA, axis=-1).max()))
        if include_phi:
            gp_max = max(gp_max, float(np.linalg.norm(gP, axis=-1).max()))
    return LipschitzEstimate(
        M=M,
        C=max(dt_max, M, gp_max),
        C_det=max(dt_max, det_max, gp_max),
        max_dt_A=dt_max,
        max_grad_Phi=gp_max,
        box=[[float(lo), float(hi)] for lo, hi in box],
        grid=tuple(int(g) for g in grid),
    )


def check_periodic(pair, points, tol=1e-9):
    """True when A(0, x) = A(T, x) on the given points."""
    points = np.asarray(points, dtype=float)
    return bool(np.max(np.abs(pair.A(0.0, points) - pair.A(pair.period, points))) <= tol)


def combine(vector_from, scalar_from, name=None):
    """Pair taking A from one pair and Phi (and singular set) from another."""
    if abs(vector_from.period - scalar_from.period) > 1e-15 * vector_from.period:
        raise ValueError("cannot combine pairs with different periods")
    if vector_from.singular_set and scalar_from.singular_set:
        warnings.warn("both pairs carry singular sets; keeping the union")
    return PotentialPair(
        vector_potential=vector_from.vector_potential,
        scalar_potential=scalar_from.scalar_potential,
        period=vector_from.period,
        singular_set=tuple(vector_from.singular_set) + tuple(scalar_from.singular_set),
        analytic_jacobian_A=vector_from.analytic_jacobian_A,
        analytic_dt_A=vector_from.analytic_dt_A,
        analytic_grad_Phi=scalar_from.analytic_grad_Phi,
        name=name or f"{vector_from.name}+{scalar_from.name}",
        params={"vector": vector_from.params, "scalar": scalar_from.params},
    )
