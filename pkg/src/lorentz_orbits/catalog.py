"""Named potential pairs and the declarative potential-spec loader.

Every catalog entry supplies analytic derivatives. ``pair_from_spec``
accepts the JSON shapes used by the CLI:

    {"catalog": "gaussian_pulse", "params": {...}}
    {"expressions": {"A": ["...", "...", "..."], "Phi": "..."},
     "singular_set": [{"center": [0, 0, 0], "radius": 0}]}
    {"vector": <spec>, "scalar": <spec>}
    {"gauge": {"base": <spec>, "f": "<expression>"}}
"""
import numpy as np
import sympy as sp

from . import expressions as ex
from .errors import ConfigError
from .potentials import (
    GaugeFunction,
    PotentialPair,
    SingularBall,
    _zero_matrix,
    _zero_scalar,
    _zero_vector,
    combine,
    gauge_transform,
)


def _vec(v, n=3):
    v = np.asarray(v, dtype=float).reshape(n)
    return v


def _shape(t, x):
    return np.broadcast_shapes(np.shape(t), np.shape(x)[:-1])


def zero(period=1.0):
    return PotentialPair(
        _zero_vector, _zero_scalar, period,
        analytic_jacobian_A=_zero_matrix, analytic_dt_A=_zero_vector, analytic_grad_Phi=_zero_vector,
        name="zero", params={},
    )


def _gaussian(x, center, width):
    y = np.asarray(x, dtype=float) - center
    e = np.exp(-np.sum(y * y, axis=-1) / width**2)
    grad = -2.0 * y / width**2 * e[..., None]
    return e, grad


def gaussian_pulse(amplitude=1.0, width=1.0, polarization=(1.0, 0.0, 0.0), center=(0.0, 0.0, 0.0), period=1.0):
    """A = a sin(2 pi t / T) exp(-|x - c|^2 / w^2) pol, Phi = 0."""
    a, w, T = float(amplitude), float(width), float(period)
    pol, c = _vec(polarization), _vec(center)
    om = 2 * np.pi / T

    def A(t, x):
        e, _ = _gaussian(x, c, w)
        return (a * np.sin(om * np.asarray(t)) * e)[..., None] * pol

    def dtA(t, x):
        e, _ = _gaussian(x, c, w)
        return (a * om * np.cos(om * np.asarray(t)) * e)[..., None] * pol

    def jac(t, x):
        _, g = _gaussian(x, c, w)
        s = a * np.sin(om * np.asarray(t))
        return s[..., None, None] * pol[:, None] * g[..., None, :]

    return PotentialPair(
        A, _zero_scalar, T, analytic_jacobian_A=jac, analytic_dt_A=dtA, analytic_grad_Phi=_zero_vector,
        name="gaussian_pulse",
        params={"amplitude": a, "width": w, "polarization": pol.tolist(), "center": c.tolist(), "period": T},
    )


def gaussian_well(depth=1.0, width=1.0, center=(0.0, 0.0, 0.0), period=1.0):
    """Autonomous Phi = -depth exp(-|x - c|^2 / w^2), A = 0."""
    d, w, c = float(depth), float(width), _vec(center)

    def Phi(t, x):
        e, _ = _gaussian(x, c, w)
        return np.broadcast_to(-d * e, _shape(t, x)).copy()

    def gPhi(t, x):
        _, g = _gaussian(x, c, w)
        return np.broadcast_to(-d * g, _shape(t, x) + (3,)).copy()

    return PotentialPair(
        _zero_vector, Phi, float(period), analytic_jacobian_A=_zero_matrix, analytic_dt_A=_zero_vector,
        analytic_grad_Phi=gPhi, name="gaussian_well",
        params={"depth": d, "width": w, "center": c.tolist(), "period": float(period)},
    )


def _bump(x, center, radius):
    """C-infinity bump exp(1 - 1/(1 - (r/R)^2)) supported in |x - c| < R, with gradient."""
    y = np.asarray(x, dtype=float) - center
    r2 = np.sum(y * y, axis=-1) / radius**2
    inside = r2 < 1.0
    denom = np.where(inside, 1.0 - r2, 1.0)
    b = np.where(inside, np.exp(1.0 - 1.0 / denom), 0.0)
    # d/dy of -1/(1 - |y|^2/R^2) is -2 y / (R^2 (1 - r2)^2)
    coef = np.where(inside, -2.0 * b / (radius**2 * denom**2), 0.0)
    return b, coef[..., None] * y


def bump_compact(amplitude=1.0, support_radius=4.0, phi_support_radius=1.0, phi_depth=1.0,
                 polarization=(1.0, 0.0, 0.0), center=(0.0, 0.0, 0.0), period=1.0):
    """Nested compact supports: A~ lives in |x| < R_A, Phi in |x| < R_0 < R_A."""
    if not phi_support_radius < support_radius:
        raise ConfigError("bump_compact needs phi_support_radius < support_radius")
    a, RA, R0, d, T = map(float, (amplitude, support_radius, phi_support_radius, phi_depth, period))
    pol, c = _vec(polarization), _vec(center)
    om = 2 * np.pi / T

    def A(t, x):
        b, _ = _bump(x, c, RA)
        return (a * np.sin(om * np.asarray(t)) * b)[..., None] * pol

    def dtA(t, x):
        b, _ = _bump(x, c, RA)
        return (a * om * np.cos(om * np.asarray(t)) * b)[..., None] * pol

    def jac(t, x):
        _, g = _bump(x, c, RA)
        s = a * np.sin(om * np.asarray(t))
        return s[..., None, None] * pol[:, None] * g[..., None, :]

    def Phi(t, x):
        b, _ = _bump(x, c, R0)
        return np.broadcast_to(-d * b, _shape(t, x)).copy()

    def gPhi(t, x):
        _, g = _bump(x, c, R0)
        return np.broadcast_to(-d * g, _shape(t, x) + (3,)).copy()

    return PotentialPair(
        A, Phi, T, analytic_jacobian_A=jac, analytic_dt_A=dtA, analytic_grad_Phi=gPhi,
        name="bump_compact",
        params={"amplitude": a, "support_radius": RA, "phi_support_radius": R0, "phi_depth": d,
                "polarization": pol.tolist(), "center": c.tolist(), "period": T},
    )


def coulomb(charge=1.0, center=(0.0, 0.0, 0.0), period=1.0):
    """Phi = -k / |x - c| with a point singularity at c, A = 0."""
    k, c = float(charge), _vec(center)

    def Phi(t, x):
        y = np.asarray(x, dtype=float) - c
        with np.errstate(divide="ignore"):
            val = -k / np.linalg.norm(y, axis=-1)
        return np.broadcast_to(val, _shape(t, x)).copy()

    def gPhi(t, x):
        y = np.asarray(x, dtype=float) - c
        with np.errstate(divide="ignore", invalid="ignore"):
            val = k * y / np.linalg.norm(y, axis=-1)[..., None] ** 3
        return np.broadcast_to(val, _shape(t, x) + (3,)).copy()

    return PotentialPair(
        _zero_vector, Phi, float(period), singular_set=(SingularBall(c, 0.0),),
        analytic_jacobian_A=_zero_matrix, analytic_dt_A=_zero_vector, analytic_grad_Phi=gPhi,
        name="coulomb", params={"charge": k, "center": c.tolist(), "period": float(period)},
    )


def log_wire(dc_current=1.0, ac_amplitude=1.0, width=1.0, period=1.0):
    """Regularised straight wire along x3 carrying a steady current, plus a
    localised oscillating drive.

    A3 = -dc/2 log(1 + x1^2 + x2^2) + ac sin(2 pi t / T) exp(-|x|^2 / w^2).
    A itself grows logarithmically while all of its derivatives decay.
    """
    I0, Ia, w, T = map(float, (dc_current, ac_amplitude, width, period))
    om = 2 * np.pi / T
    origin = np.zeros(3)
    ez = np.array([0.0, 0.0, 1.0])

    def A(t, x):
        x = np.asarray(x, dtype=float)
        rho2 = x[..., 0] ** 2 + x[..., 1] ** 2
        e, _ = _gaussian(x, origin, w)
        return (-0.5 * I0 * np.log1p(rho2) + Ia * np.sin(om * np.asarray(t)) * e)[..., None] * ez

    def dtA(t, x):
        e, _ = _gaussian(x, origin, w)
        return (Ia * om * np.cos(om * np.asarray(t)) * e)[..., None] * ez

    def jac(t, x):
        x = np.asarray(x, dtype=float)
        rho2 = x[..., 0] ** 2 + x[..., 1] ** 2
        _, g = _gaussian(x, origin, w)
        s = Ia * np.sin(om * np.asarray(t))
        row = s[..., None] * g
        row = row + np.stack([-I0 * x[..., 0] / (1 + rho2), -I0 * x[..., 1] / (1 + rho2),
                              np.zeros_like(rho2)], axis=-1)
        out = np.zeros(row.shape[:-1] + (3, 3))
        out[..., 2, :] = row
        return out

    return PotentialPair(
        A, _zero_scalar, T, analytic_jacobian_A=jac, analytic_dt_A=dtA, analytic_grad_Phi=_zero_vector,
        name="log_wire", params={"dc_current": I0, "ac_amplitude": Ia, "width": w, "period": T},
    )


def magnetostatic(cap=None, fraction=0.99, length=1.0, center=(0.0, 0.0, 0.0), period=1.0):
    """Autonomous swirl A = k (-y2, y1, 0) exp(-|y|^2 / (2 l^2)), y = x - c.

    sup ||grad A||_op = k, attained at y = 0; k = fraction * cap with the
    default cap pi / (2T).
    """
    T = float(period)
    cap = np.pi / (2 * T) if cap is None else float(cap)
    k, ell, c = float(fraction) * cap, float(length), _vec(center)
    S = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])

    def _parts(x):
        y = np.asarray(x, dtype=float) - c
        e = np.exp(-0.5 * np.sum(y * y, axis=-1) / ell**2)
        v = np.stack([-y[..., 1], y[..., 0], np.zeros_like(y[..., 0])], axis=-1)
        return y, e, v

    def A(t, x):
        _, e, v = _parts(x)
        return np.broadcast_to(k * e[..., None] * v, _shape(t, x) + (3,)).copy()

    def jac(t, x):
        y, e, v = _parts(x)
        J = k * e[..., None, None] * (S - v[..., :, None] * y[..., None, :] / ell**2)
        return np.broadcast_to(J, _shape(t, x) + (3, 3)).copy()

    return PotentialPair(
        A, _zero_scalar, T, analytic_jacobian_A=jac, analytic_dt_A=_zero_vector,
        analytic_grad_Phi=_zero_vector, name="magnetostatic",
        params={"cap": cap, "fraction": float(fraction), "grad_norm": k, "length": ell,
                "center": c.tolist(), "period": T},
    )


def singular_oscillation(amplitude=1.0, polarization=(1.0, 0.0, 0.0), center=(0.0, 0.0, 0.0), period=1.0):
    """A = a sin(2 pi t / T) / |x - c| pol: oscillations blow up at c."""
    a, T = float(amplitude), float(period)
    pol, c = _vec(polarization), _vec(center)
    om = 2 * np.pi / T

    def A(t, x):
        r = np.linalg.norm(np.asarray(x, dtype=float) - c, axis=-1)
        return (a * np.sin(om * np.asarray(t)) / r)[..., None] * pol

    def dtA(t, x):
        r = np.linalg.norm(np.asarray(x, dtype=float) - c, axis=-1)
        return (a * om * np.cos(om * np.asarray(t)) / r)[..., None] * pol

    def jac(t, x):
        y = np.asarray(x, dtype=float) - c
        r = np.linalg.norm(y, axis=-1)
        g = -y / r[..., None] ** 3
        s = a * np.sin(om * np.asarray(t))
        return s[..., None, None] * pol[:, None] * g[..., None, :]

    return PotentialPair(
        A, _zero_scalar, T, singular_set=(SingularBall(c, 0.0),), analytic_jacobian_A=jac,
        analytic_dt_A=dtA, analytic_grad_Phi=_zero_vector, name="singular_oscillation",
        params={"amplitude": a, "polarization": pol.tolist(), "center": c.tolist(), "period": T},
    )


def spatially_constant(amplitude=1.0, polarization=(1.0, 0.0, 0.0), period=1.0):
    """A = a sin(2 pi t / T) pol, independent of x (zero Jacobian)."""
    a, T = float(amplitude), float(period)
    pol = _vec(polarization)
    om = 2 * np.pi / T

    def A(t, x):
        s = np.broadcast_to(a * np.sin(om * np.asarray(t)), _shape(t, x))
        return s[..., None] * pol

    def dtA(t, x):
        s = np.broadcast_to(a * om * np.cos(om * np.asarray(t)), _shape(t, x))
        return s[..., None] * pol

    return PotentialPair(
        A, _zero_scalar, T, analytic_jacobian_A=_zero_matrix, analytic_dt_A=dtA,
        analytic_grad_Phi=_zero_vector, name="spatially_constant",
        params={"amplitude": a, "polarization": pol.tolist(), "period": T},
    )


def uniform_field(B=(0.0, 0.0, 1.0), E=(0.0, 0.0, 0.0), period=1.0):
    """Uniform fields through A = B x x / 2 and Phi = -E . x (test fixture,
    not decaying)."""
    Bv, Ev = _vec(B), _vec(E)
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    Jc = 0.5 * np.einsum("ijm,j->im", eps, Bv)

    def A(t, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(0.5 * np.cross(Bv, x), _shape(t, x) + (3,)).copy()

    def Phi(t, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(-(x @ Ev), _shape(t, x)).copy()

    def jac(t, x):
        return np.broadcast_to(Jc, _shape(t, x) + (3, 3)).copy()

    def gPhi(t, x):
        return np.broadcast_to(-Ev, _shape(t, x) + (3,)).copy()

    return PotentialPair(
        A, Phi, float(period), analytic_jacobian_A=jac, analytic_dt_A=_zero_vector, analytic_grad_Phi=gPhi,
        name="uniform_field", params={"B": Bv.tolist(), "E": Ev.tolist(), "period": float(period)},
    )


CATALOG = {
    "zero": zero,
    "gaussian_pulse": gaussian_pulse,
    "gaussian_well": gaussian_well,
    "bump_compact": bump_compact,
    "coulomb": coulomb,
    "log_wire": log_wire,
    "magnetostatic": magnetostatic,
    "singular_oscillation": singular_oscillation,
    "spatially_constant": spatially_constant,
    "uniform_field": uniform_field,
}


def make(name, period=1.0, **params):
    if name not in CATALOG:
        raise ConfigError(f"unknown catalog potential {name!r}; known: {sorted(CATALOG)}")
    try:
        return CATALOG[name](period=period, **params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name!r}: {exc}") from exc


# -- expression-defined pairs -------------------------------------------------------

def expression_pair(A_exprs, Phi_expr="0", period=1.0, singular_set=()):
    """Pair from closed-form component strings; all derivatives are symbolic."""
    if len(A_exprs) != 3:
        raise ConfigError("vector potential needs exactly three components")
    A_sym = [ex.parse_expression(s, period) for s in A_exprs]
    P_sym = ex.parse_expression(Phi_expr, period)
    jac = [[sp.diff(a, s) for s in ex.SPACE] for a in A_sym]
    dtA = [sp.diff(a, ex.t_sym) for a in A_sym]
    gP = [sp.diff(P_sym, s) for s in ex.SPACE]
    balls = tuple(
        SingularBall(b["center"], b.get("radius", 0.0)) if isinstance(b, dict) else SingularBall(*b)
        for b in singular_set
    )
    return PotentialPair(
        ex.compile_vector(A_sym), ex.compile_scalar(P_sym), float(period), singular_set=balls,
        analytic_jacobian_A=ex.compile_matrix(jac), analytic_dt_A=ex.compile_vector(dtA),
        analytic_grad_Phi=ex.compile_vector(gP), name="expression",
        params={"A": list(map(str, A_exprs)), "Phi": str(Phi_expr), "period": float(period)},
    )


def gauge_from_expression(text, period=1.0):
    f = ex.parse_expression(text, period)
    dt, grad, hess, dt_grad = ex.scalar_derivatives(f)
    return GaugeFunction(
        f=ex.compile_scalar(f), dt=ex.compile_scalar(dt), grad=ex.compile_vector(grad),
        hess=ex.compile_matrix(hess), dt_grad=ex.compile_vector(dt_grad), label=str(text),
    )


def pair_from_spec(spec, period=1.0):
    """Build a PotentialPair from a JSON-style potential spec."""
    if not isinstance(spec, dict):
        raise ConfigError("potential spec must be an object")
    if "catalog" in spec:
        return make(spec["catalog"], period=period, **spec.get("params", {}))
    if "expressions" in spec:
        e = spec["expressions"]
        return expression_pair(e.get("A", ["0", "0", "0"]), e.get("Phi", "0"), period,
                               spec.get("singular_set", ()))
    if "vector" in spec and "scalar" in spec:
        return combine(pair_from_spec(spec["vector"], period), pair_from_spec(spec["scalar"], period))
    if "gauge" in spec:
        g = spec["gauge"]
        if "base" not in g or "f" not in g:
            raise ConfigError("gauge spec needs 'base' and 'f'")
        return gauge_transform(pair_from_spec(g["base"], period), gauge_from_expression(g["f"], period))
    raise ConfigError(f"unrecognised potential spec keys: {sorted(spec)}")
