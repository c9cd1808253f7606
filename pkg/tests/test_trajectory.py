import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lorentz_orbits import catalog
from lorentz_orbits.errors import PreconditionViolated
from lorentz_orbits.optimizer import project_K
from lorentz_orbits.trajectory import (
    PeriodicTrajectory,
    circle,
    decompose,
    derivative,
    in_K,
    in_Lambda,
    norms,
    poincare_wirtinger_check,
    random_trajectory,
    tilde_sup_check,
)

seeds = st.integers(0, 2**32 - 1)
periods = st.floats(0.2, 5.0)


def test_invariants_enforced():
    with pytest.raises(ValueError):
        PeriodicTrajectory(np.zeros((7, 3)), 1.0)
    with pytest.raises(ValueError):
        PeriodicTrajectory(np.zeros((6, 3)), 1.0)
    bad = np.zeros((8, 3))
    bad[2, 1] = np.nan
    with pytest.raises(ValueError):
        PeriodicTrajectory(bad, 1.0)
    q = PeriodicTrajectory(np.zeros((8, 3)), 1.0)
    with pytest.raises(ValueError):
        q.samples[0, 0] = 1.0


def test_derivative_of_constant_is_zero():
    q = PeriodicTrajectory.constant([1.5, -2.0, 3.25], 64, 1.7)
    assert np.all(derivative(q) == 0)


def test_spectral_derivative_of_harmonic():
    T = 2.5
    q = PeriodicTrajectory.from_function(
        lambda t: np.stack([np.cos(2 * np.pi * t / T), np.sin(2 * np.pi * t / T), 0 * t], axis=1), 64, T)
    w = 2 * np.pi / T
    exact = w * np.stack([-np.sin(w * q.times), np.cos(w * q.times), 0 * q.times], axis=1)
    np.testing.assert_allclose(derivative(q), exact, atol=1e-12)


def test_central_derivative_truncation_error():
    T, N = 1.0, 8
    q = PeriodicTrajectory.from_function(
        lambda t: np.stack([np.cos(4 * np.pi * t / T), 0 * t, 0 * t], axis=1), N, T, scheme="central2")
    dense_t = q.times
    exact = -4 * np.pi / T * np.sin(4 * np.pi * dense_t / T)
    err = np.max(np.abs(derivative(q)[:, 0] - exact))
    assert err <= (2 * np.pi * 2 / T) ** 3 * (T / N) ** 2 / 6


def test_decompose_examples(rng):
    d = decompose(PeriodicTrajectory.constant([1, 2, 3], 16, 1.0))
    np.testing.assert_array_equal(d.mean, [1, 2, 3])
    assert np.all(d.oscillation.samples == 0)

    q = PeriodicTrajectory.from_function(
        lambda t: np.stack([5 + np.sin(2 * np.pi * t), 0 * t, 0 * t], axis=1), 32, 1.0)
    np.testing.assert_allclose(decompose(q).mean, [5, 0, 0], atol=1e-14)

    r = PeriodicTrajectory(rng.normal(size=(64, 3)), 1.0)
    np.testing.assert_allclose(decompose(r).oscillation.samples.mean(axis=0), 0, atol=1e-14)


@given(seeds)
def test_reconstruction_and_derivative_commute(seed):
    q = random_trajectory(np.random.default_rng(seed), 32, 1.3, max_speed=0.7)
    d = decompose(q)
    # (x - m) + m can differ from x by one rounding step
    ulp = np.finfo(float).eps * np.abs(q.samples).max()
    np.testing.assert_allclose(d.mean + d.oscillation.samples, q.samples, rtol=0, atol=2 * ulp)
    np.testing.assert_allclose(derivative(q), derivative(d.oscillation), atol=1e-12)


def test_norm_examples():
    T = 1.0
    unit = circle(T / (2 * np.pi), 128, T)
    assert norms(unit).sup_speed == pytest.approx(1.0, abs=1e-10)
    n = norms(PeriodicTrajectory.constant([3, 4, 0], 16, T))
    assert (n.sup_norm, n.sup_speed, n.W_norm) == (5.0, 0.0, 5.0)
    s = PeriodicTrajectory.from_function(lambda t: np.stack([np.sin(2 * np.pi * t), 0 * t, 0 * t], 1), 64, T)
    assert norms(s).L2_norm == pytest.approx(math.sqrt(0.5), abs=1e-14)


def test_membership_examples():
    T = 1.0
    assert in_K(circle(T / (4 * np.pi), 64, T))
    assert not in_K(circle(T / np.pi, 64, T))
    coul = catalog.make("coulomb", T)
    assert not in_Lambda(PeriodicTrajectory.constant([0, 0, 0], 16, T), coul)
    assert in_Lambda(PeriodicTrajectory.constant([1, 0, 0], 16, T), coul)


def test_lambda_midpoints_catch_crossing():
    # a coarse segment passing straight through a point singularity
    coul = catalog.make("coulomb", 1.0)
    x = np.zeros((8, 3))
    x[:, 0] = [-1, 1, 1, 1, 1, 1, 1, -1]
    q = PeriodicTrajectory(x, 1.0)
    assert not in_Lambda(q, coul)


def test_poincare_examples():
    T = 2.0
    s = PeriodicTrajectory.from_function(
        lambda t: np.stack([np.sin(2 * np.pi * t / T), 0 * t, 0 * t], 1), 64, T)
    lhs, rhs, ok = poincare_wirtinger_check(s)
    assert lhs == pytest.approx((np.pi / T) ** 2 * T / 2, rel=1e-12)
    assert rhs == pytest.approx((2 * np.pi / T) ** 2 * T / 2, rel=1e-12)
    assert ok and lhs / rhs == pytest.approx(0.25, rel=1e-12)
    assert poincare_wirtinger_check(PeriodicTrajectory.constant([1, 1, 1], 8, T)) == (0.0, 0.0, True)


@given(seeds, periods)
def test_poincare_sweep(seed, T):
    q = random_trajectory(np.random.default_rng(seed), 128, T, max_speed=1.0)
    assert poincare_wirtinger_check(q)[2]


def test_tilde_sup_examples():
    assert tilde_sup_check(PeriodicTrajectory.constant([2, 0, 0], 8, 1.0)) == (0.0, True)
    value, ok = tilde_sup_check(circle(1 / (2 * np.pi), 64, 1.0))
    assert value == pytest.approx(1 / (2 * np.pi), rel=1e-12) and ok
    with pytest.raises(PreconditionViolated):
        tilde_sup_check(circle(1.0, 64, 1.0))


@given(seeds, periods, st.floats(0.5, 4.0))
def test_tilde_sup_after_projection(seed, T, speed):
    q = random_trajectory(np.random.default_rng(seed), 64, T, max_speed=speed, n_modes=10)
    p = project_K(q, 0.95)
    if in_K(p):
        assert tilde_sup_check(p)[1]


def test_json_and_csv_round_trip(rng):
    q = PeriodicTrajectory(rng.normal(size=(16, 3)) * 1e3, 0.7)
    assert np.array_equal(PeriodicTrajectory.from_json(q.to_json()).samples, q.samples)
    back = PeriodicTrajectory.from_csv(q.to_csv())
    assert np.array_equal(back.samples, q.samples)
    assert back.period == pytest.approx(q.period, rel=1e-15)
