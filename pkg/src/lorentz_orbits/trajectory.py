"""Uniformly sampled T-periodic curves in R^3."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import PreconditionViolated

TOL_SPEED = 1e-9
SCHEMES = ("spectral", "central2")


def spectral_derivative(values, period):
    """d/dt of periodic samples along axis 0 by FFT; the Nyquist mode is dropped.

    Constant columns return exact zeros.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    k = np.fft.rfftfreq(n, d=period / n) * 2 * np.pi
    if n % 2 == 0:
        k[-1] = 0.0
    coef = np.fft.rfft(values, axis=0)
    out = np.fft.irfft(1j * k.reshape((-1,) + (1,) * (values.ndim - 1)) * coef, n=n, axis=0)
    const = np.ptp(values, axis=0) == 0
    if np.any(const):
        out[..., const] = 0.0
    return out


def central_derivative(values, period):
    values = np.asarray(values, dtype=float)
    h = period / values.shape[0]
    return (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0)) / (2 * h)


def differentiate(values, period, scheme="spectral"):
    if scheme == "spectral":
        return spectral_derivative(values, period)
    if scheme == "central2":
        return central_derivative(values, period)
    raise ValueError(f"unknown derivative scheme {scheme!r}")


def spectral_primitive(values, period):
    """Zero-mean periodic antiderivative of the zero-mean part of ``values``."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    k = np.fft.rfftfreq(n, d=period / n) * 2 * np.pi
    coef = np.fft.rfft(values, axis=0)
    inv = np.zeros_like(k, dtype=complex)
    inv[1:] = 1.0 / (1j * k[1:])
    if n % 2 == 0:
        inv[-1] = 0.0
    return np.fft.irfft(inv.reshape((-1,) + (1,) * (values.ndim - 1)) * coef, n=n, axis=0)


@dataclass(frozen=True, eq=False)
class PeriodicTrajectory:
    samples: np.ndarray
    period: float
    scheme: str = "spectral"

    def __post_init__(self):
        q = np.array(self.samples, dtype=float)
        if q.ndim != 2 or q.shape[1] != 3:
            raise ValueError("samples must have shape (N, 3)")
        n = q.shape[0]
        if n < 8 or n % 2:
            raise ValueError(f"need an even number of samples >= 8, got {n}")
        if not np.all(np.isfinite(q)):
            raise ValueError("samples must be finite")
        if not self.period > 0:
            raise ValueError("period must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown derivative scheme {self.scheme!r}")
        q.setflags(write=False)
        object.__setattr__(self, "samples", q)
        object.__setattr__(self, "period", float(self.period))

    @property
    def N(self):
        return self.samples.shape[0]

    @property
    def h(self):
        return self.period / self.N

    @property
    def times(self):
        return np.arange(self.N) * self.h

    @cached_property
    def velocity(self):
        v = differentiate(self.samples, self.period, self.scheme)
        v.setflags(write=False)
        return v

    def with_samples(self, samples):
        return PeriodicTrajectory(samples, self.period, self.scheme)

    @classmethod
    def constant(cls, point, N, period, scheme="spectral"):
        return cls(np.tile(np.asarray(point, dtype=float), (N, 1)), period, scheme)

    @classmethod
    def from_function(cls, func, N, period, scheme="spectral"):
        t = np.arange(N) * (period / N)
        return cls(np.asarray(func(t), dtype=float), period, scheme)

    # -- serialization ----------------------------------------------------------
    def to_dict(self):
        return {"period": self.period, "scheme": self.scheme, "samples": self.samples.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(np.asarray(data["samples"], dtype=float), data["period"], data.get("scheme", "spectral"))

    def to_json(self):
        from .serialization import dumps
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x1", "x2", "x3"])
        for t, row in zip(self.times, self.samples):
            w.writerow([format(t, ".17g")] + [format(v, ".17g") for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, scheme="spectral"):
        rows = list(csv.reader(io.StringIO(text)))
        body = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        n = body.shape[0]
        dt = body[1, 0] - body[0, 0]
        return cls(body[:, 1:4], dt * n, scheme)


def derivative(q):
    return np.array(q.velocity)


@dataclass(frozen=True, eq=False)
class TrajectoryDecomposition:
    mean: np.ndarray
    oscillation: PeriodicTrajectory


def decompose(q):
    mean = q.samples.mean(axis=0)
    return TrajectoryDecomposition(mean=mean, oscillation=q.with_samples(q.samples - mean))


@dataclass(frozen=True)
class TrajectoryNorms:
    sup_norm: float
    L2_norm: float
    sup_speed: float
    W_norm: float


def sup_speed(q):
    return float(np.max(np.linalg.norm(q.velocity, axis=1)))


def l2_norm(values, period):
    values = np.asarray(values)
    return float(np.sqrt(period / values.shape[0] * np.sum(values**2)))


def norms(q):
    sup_n = float(np.max(np.linalg.norm(q.samples, axis=1)))
    s = sup_speed(q)
    return TrajectoryNorms(sup_norm=sup_n, L2_norm=l2_norm(q.samples, q.period), sup_speed=s, W_norm=sup_n + s)


def in_K(q, tol_speed=TOL_SPEED):
    return sup_speed(q) <= 1.0 + tol_speed


def lambda_distance(q, singular_set):
    """Smallest distance from samples and segment midpoints to the singular balls."""
    balls = getattr(singular_set, "singular_set", singular_set)
    if not balls:
        return float("inf")
    pts = q.samples
    mids = 0.5 * (pts + np.roll(pts, -1, axis=0))
    allp = np.concatenate([pts, mids])
    return float(min(np.min(b.distance(allp)) for b in balls))


def in_Lambda(q, singular_set, dist_min=None):
    """True when the curve keeps a positive margin from every singular ball.

    ``singular_set`` may be a PotentialPair or an iterable of SingularBall.
    """
    if dist_min is None:
        dist_min = 1e-6 * q.period
    return lambda_distance(q, singular_set) > dist_min


def poincare_wirtinger_check(q, tol_rel=1e-9):
    osc = q.samples - q.samples.mean(axis=0)
    lhs = (np.pi / q.period) ** 2 * l2_norm(osc, q.period) ** 2
    rhs = l2_norm(q.velocity, q.period) ** 2
    return lhs, rhs, bool(lhs <= rhs * (1 + tol_rel) + 1e-300)


def tilde_sup_check(q, tol_rel=1e-9, tol_speed=TOL_SPEED):
    if not in_K(q, tol_speed):
        raise PreconditionViolated("trajectory is not in K (sup speed > 1)")
    osc = q.samples - q.samples.mean(axis=0)
    value = float(np.max(np.linalg.norm(osc, axis=1)))
    return value, bool(value <= q.period * (1 + tol_rel))


def random_trajectory(rng, N=64, period=1.0, max_speed=1.0, n_modes=6, center_scale=1.0,
                      center=None, scheme="spectral"):
    """Random band-limited trajectory with sup speed equal to ``max_speed``.

    Modes 1..n_modes (n_modes < N/2) with 1/k amplitude decay; the result is
    rescaled about its mean so the spectral sup speed hits ``max_speed``.
    """
    n_modes = min(n_modes, N // 2 - 1)
    t = np.arange(N) * (period / N)
    k = np.arange(1, n_modes + 1)
    a = rng.normal(size=(n_modes, 3)) / k[:, None]
    b = rng.normal(size=(n_modes, 3)) / k[:, None]
    w = 2 * np.pi * k[:, None] * t[None, :] / period
    osc = np.einsum("kn,kd->nd", np.cos(w), a) + np.einsum("kn,kd->nd", np.sin(w), b)
    if center is None:
        center = rng.normal(size=3) * center_scale
    q = PeriodicTrajectory(osc, period, scheme)
    s = sup_speed(q)
    scale = max_speed / s if s > 0 else 0.0
    return PeriodicTrajectory(np.asarray(center, dtype=float) + scale * osc, period, scheme)


def circle(radius, N, period, center=(0.0, 0.0, 0.0), scheme="spectral"):
    t = np.arange(N) * (period / N)
    w = 2 * np.pi * t / period
    pts = np.stack([radius * np.cos(w), radius * np.sin(w), np.zeros_like(w)], axis=1)
    return PeriodicTrajectory(np.asarray(center, dtype=float) + pts, period, scheme)
