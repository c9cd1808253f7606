"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``python3 tests/test_acceptance.py`` or through pytest,
which repeats the lines in the terminal summary.
"""
import json
import math
import sys
import time

import numpy as np
import pytest
from scipy.special import ellipe

from conftest import ACCEPTANCE_LINES
from lorentz_orbits import catalog, potentials
from lorentz_orbits.action import action_value, f_term, grad_action, psi
from lorentz_orbits.cli import main as cli_main
from lorentz_orbits.dynamics import PhaseState, integrate
from lorentz_orbits.potentials import lipschitz_and_C
from lorentz_orbits.trajectory import PeriodicTrajectory, l2_norm, random_trajectory, sup_speed
from lorentz_orbits.witness import (
    certify_lemma_negative,
    certify_theorem2,
    certify_theorem3_flow,
    divergence_probe,
    witness_trajectory,
)


def report(n, checks, detail):
    ok = all(bool(v) for v in checks.values())
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, "failed checks: " + ", ".join(k for k, v in checks.items() if not v)


def test_criterion_01_witness_negativity(pulse):
    t0 = time.perf_counter()
    cert = certify_lemma_negative(pulse, N=1024)
    elapsed = time.perf_counter() - t0
    T, M = pulse.period, cert.M_used
    eps = 0.5 * math.pi / (math.pi + M * T)
    # g' = A~(., b) = sin(2 pi t) exp(-|b|^2) e1, so ||g'||_2^2 = exp(-2 |b|^2) / 2
    b = np.asarray(cert.base_point)
    gsq = 0.5 * math.exp(-2 * float(b @ b))
    bound = -eps * gsq * (1 - eps * (math.pi + M * T) / math.pi)
    report(1, {
        "negative": cert.negative,
        "epsilon": math.isclose(cert.epsilon, eps, rel_tol=1e-12),
        "g_dot_L2_sq": math.isclose(cert.g_dot_L2_sq, gsq, rel_tol=1e-10),
        "bound": cert.action_value <= bound + 1e-6,
        "runtime": elapsed < 1.0,
    }, f"I0 = {cert.action_value:.6g} <= {bound:.6g} + 1e-6, eps = {eps:.6g}, M = {M:.4g}, {elapsed:.2f} s")


def test_criterion_02_exact_degenerate_case():
    pair = catalog.make("spatially_constant", 1.0)
    p = witness_trajectory(pair, np.zeros(3), 0.5, N=1024)
    value = action_value(p, pair)
    # p' = -(1/2) sin(2 pi t) e1, so Psi = int (1 - sqrt(1 - sin^2(2 pi t) / 4)); F = -1/4
    t = (np.arange(4096) + 0.5) / 4096
    psi_quad = float(np.mean(1 - np.sqrt(1 - 0.25 * np.sin(2 * np.pi * t) ** 2)))
    psi_elliptic = 1 - 2 / math.pi * ellipe(0.25)
    expected = -1 / 8 + (psi_quad - 1 / 8)
    rel = abs(value - expected) / abs(expected)
    report(2, {
        "closed_form": rel <= 1e-8,
        "quadrature_vs_elliptic": math.isclose(psi_quad, psi_elliptic, rel_tol=1e-12),
    }, f"I0 = {value:.12g}, oracle = {expected:.12g}, relative error {rel:.2e}")


def test_criterion_03_theorem2_trend(slow_envelope_pair):
    t0 = time.perf_counter()
    rows, cert, trend = certify_theorem2(slow_envelope_pair, [(n, 0, 0) for n in range(2, 7)])
    elapsed = time.perf_counter() - t0
    r1 = [r.r1 for r in rows]
    T = slow_envelope_pair.period
    eps = 0.5 / (3 + cert.M_used * T / math.pi)
    report(3, {
        "r1_decreasing": all(b < a for a, b in zip(r1, r1[1:])),
        "trend_ok": trend,
        "negative": cert.action_value < 0,
        "epsilon": math.isclose(cert.epsilon, eps, rel_tol=1e-12),
        "runtime": elapsed < 5.0,
    }, f"r1 = {', '.join(f'{v:.3g}' for v in r1)}; I = {cert.action_value:.4g}, {elapsed:.2f} s")


def test_criterion_04_theorem3_flow(pulse):
    cert = certify_theorem3_flow(pulse, np.zeros(3), N=64, max_flow_steps=200)
    hist = cert.details["history"]
    report(4, {
        "negative": cert.action_value < -1e-8,
        "steps": cert.details["steps"] <= 200,
        "monotone": all(b <= a for a, b in zip(hist, hist[1:])),
    }, f"I = {cert.action_value:.4g} after {cert.details['steps']} accepted steps")


def test_criterion_05_gauge_invariance(pulse, rng):
    f = catalog.gauge_from_expression("x1*sin(2*pi*t/T)", pulse.period)
    new = potentials.gauge_transform(pulse, f)
    ts = rng.uniform(0, pulse.period, 100)
    xs = rng.uniform(-4, 4, (100, 3))
    E0, B0 = potentials.fields(pulse, ts, xs)
    E1, B1 = potentials.fields(new, ts, xs)
    dE, dB = float(np.max(np.abs(E0 - E1))), float(np.max(np.abs(B0 - B1)))
    # the gauge really changes the potentials: Phi picks up d_t f
    dPhi = float(np.max(np.abs(new.Phi(ts, xs) - pulse.Phi(ts, xs))))
    report(5, {"E": dE <= 1e-8, "B": dB <= 1e-8, "nontrivial": dPhi > 0.1},
           f"max |dE| = {dE:.2e}, max |dB| = {dB:.2e} over 100 probes")


def test_criterion_06_minimizer_certification(tmp_path):
    cfg = tmp_path / "pulse.json"
    cfg.write_text(json.dumps({"potential": {"catalog": "gaussian_pulse"}, "grid_size": 256}))
    t0 = time.perf_counter()
    code = cli_main(["minimize", "--config", str(cfg), "--out", str(tmp_path / "out")])
    elapsed = time.perf_counter() - t0
    res = json.loads((tmp_path / "out" / "minimize.json").read_text())["result"]
    q = PeriodicTrajectory.from_dict(res["trajectory"])
    pair = catalog.make("gaussian_pulse", 1.0)
    C = lipschitz_and_C(pair).C
    rho = C / math.sqrt(1 + C * C)
    value = action_value(q, pair)
    osc = float(np.max(np.linalg.norm(q.samples - q.samples.mean(axis=0), axis=1)))
    resid = res["details"]["periodicity_residual"]
    report(6, {
        "exit_0": code == 0,
        "N": q.N == 256,
        "negative": value < 0,
        "non_constant": osc > 1e-4,
        "el_residual": res["certification"]["el_residual"] <= 1e-3,
        "speed": sup_speed(q) <= rho + 1e-6,
        "periodicity": resid is not None and resid <= 1e-2,
        "runtime": elapsed < 60.0,
    }, (f"I = {value:.6g}, osc = {osc:.3g}, EL = {res['certification']['el_residual']:.2e}, "
        f"speed {sup_speed(q):.4f} <= rho {rho:.5f}, periodicity {resid:.2e}, {elapsed:.1f} s"))


def test_criterion_07_magnetostatic_nonnegative():
    pair = catalog.make("magnetostatic", 1.0)
    M = lipschitz_and_C(pair).M
    rng = np.random.default_rng(7)
    worst = math.inf
    for _ in range(10_000):
        q = random_trajectory(rng, 32, 1.0, max_speed=rng.uniform(0.05, 1.0), n_modes=int(rng.integers(1, 8)),
                              center=rng.uniform(-2, 2, 3))
        worst = min(worst, action_value(q, pair))
    consts = [action_value(PeriodicTrajectory.constant(b, 32, 1.0), pair) for b in rng.uniform(-4, 4, (100, 3))]
    report(7, {
        "field_cap": M < math.pi / 2,
        "sweep": worst >= -1e-9,
        "constants": all(v == 0.0 for v in consts),
    }, f"M = {M:.4f} < pi/2, min I over 10^4 trajectories = {worst:.3e}, 100 constants give I = 0")


def _central_fd(q, pair, step=1e-6):
    x = q.samples
    out = np.zeros_like(x)
    for i in range(x.shape[0]):
        for d in range(3):
            xp, xm = x.copy(), x.copy()
            xp[i, d] += step
            xm[i, d] -= step
            out[i, d] = (action_value(q.with_samples(xp), pair) - action_value(q.with_samples(xm), pair)) / (2 * step)
    return out


def test_criterion_08_gradient_correctness(pulse):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        q = random_trajectory(rng, 64, 1.0, max_speed=rng.uniform(0.2, 0.9), center_scale=0.7)
        g = grad_action(q, pulse)
        fd = _central_fd(q, pulse)
        worst = max(worst, float(np.max(np.abs(g - fd)) / np.max(np.abs(fd))))
    report(8, {"fd": worst <= 1e-5}, f"max relative error {worst:.2e} over 20 trajectories, N = 64")


def test_criterion_09_inequality_suite(pulse):
    rng = np.random.default_rng(9)
    pw = sup_ok = psi_ok = True
    for _ in range(1000):
        T = float(rng.uniform(0.3, 3.0))
        q = random_trajectory(rng, 64, T, max_speed=rng.uniform(0.01, 1.0), n_modes=int(rng.integers(1, 12)))
        osc = q.samples - q.samples.mean(axis=0)
        kinetic = l2_norm(q.velocity, T) ** 2
        pw &= (2 * math.pi / T) ** 2 * l2_norm(osc, T) ** 2 <= kinetic * (1 + 1e-9)
        sup_ok &= float(np.max(np.linalg.norm(osc, axis=1))) <= T * (1 + 1e-9)
        psi_ok &= psi(q) <= kinetic * (1 + 1e-12)
    far = []
    for _ in range(20):
        q = random_trajectory(rng, 64, 1.0, max_speed=0.9)
        u = rng.normal(size=3)
        far.append(abs(f_term(q.with_samples(q.samples + 1e3 * u / np.linalg.norm(u)), pulse)))
    report(9, {"poincare_wirtinger": pw, "tilde_sup": sup_ok, "psi_kinetic": psi_ok,
               "translation": max(far) <= 1e-3},
           f"1000 random trajectories pass; max |F| at R = 1e3 is {max(far):.2e}")


def _gyration_error(steps):
    pair = catalog.make("uniform_field", 1.0, B=(0, 0, 1))
    period = 2 * math.pi * math.sqrt(2)  # |p| = 1, B0 = 1: omega = B0 / gamma
    s0 = PhaseState(np.array([0.3, -0.2, 0.1]), np.array([0.0, 1.0, 0.0]), 0.0)
    end = integrate(pair, s0, period, steps)[-1]
    return float(np.linalg.norm(end.position - s0.position) + np.linalg.norm(end.momentum - s0.momentum))


def test_criterion_10_dynamics_oracle(pulse):
    closure = _gyration_error(10_000)
    order = math.log2(_gyration_error(1000) / _gyration_error(2000))
    C = lipschitz_and_C(pulse).C
    worst = 0.0
    for x0 in ([0, 0, 0], [0.4, 0.1, 0], [-0.5, 0.5, 0.3], [1.2, 0, -0.4]):
        orbit = integrate(pulse, PhaseState(np.array(x0, float), np.zeros(3), 0.0), 1.0, 2000)
        worst = max(worst, max(np.linalg.norm(s.momentum) / (s.time * C) for s in orbit[1:]))
    report(10, {"closure": closure <= 1e-8, "order": 3.7 <= order <= 4.3, "momentum_chain": worst <= 1 + 1e-9},
           f"closure {closure:.1e}, order {order:.3f}, max |p| / (t C) = {worst:.6f}")


def test_criterion_11_divergence_probe():
    pair = catalog.make("singular_oscillation", 1.0)
    pts = [(0.0, 2.0**-k, 0.0) for k in range(1, 8)]
    rows, monotone = divergence_probe(pair, pts, N=1024)
    T = pair.period
    # A~(t, b) = sin(2 pi t) / |b| e1: ||g'||_2^2 = T / (2 |b|^2), sup |g'| = 1 / |b|
    rel = max(abs(r.ratio - T / (2 * r.radius)) / (T / (2 * r.radius)) for r in rows)
    doubling = all(math.isclose(b.ratio / a.ratio, 2.0, rel_tol=1e-3) for a, b in zip(rows, rows[1:]))
    vals = [r.action_value for r in rows]
    report(11, {"closed_form": rel <= 1e-3, "doubling": doubling,
                "strictly_decreasing": monotone and all(b < a for a, b in zip(vals, vals[1:]))},
           f"ratio relative error {rel:.1e}; I from {vals[0]:.4g} to {vals[-1]:.4g}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
