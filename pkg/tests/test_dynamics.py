import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lorentz_orbits import catalog
from lorentz_orbits.dynamics import (
    PhaseState,
    hamiltonian_rhs,
    initial_state,
    integrate,
    orbit_to_csv,
    periodicity_residual,
    rho_from_C,
    velocity_bound,
)
from lorentz_orbits.errors import SingularEncounter, SingularPoint
from lorentz_orbits.optimizer import MinimizeConfig, minimize
from lorentz_orbits.potentials import lipschitz_and_C
from lorentz_orbits.trajectory import PeriodicTrajectory, random_trajectory

vectors = st.lists(st.floats(-5, 5), min_size=3, max_size=3).map(np.array)


def gyration_setup(p0=1.0, B0=1.0):
    """Uniform B along x3 and a charge with |p| = p0 in the x1-x2 plane.

    The analytic orbit is a circle of radius p0 / B0 traversed with angular
    frequency B0 / gamma, gamma = sqrt(1 + p0^2).
    """
    gamma = math.sqrt(1 + p0 * p0)
    period = 2 * math.pi * gamma / B0
    pair = catalog.make("uniform_field", period, B=(0, 0, B0))
    return pair, PhaseState(np.zeros(3), np.array([p0, 0.0, 0.0]), 0.0), period


def end_error(pair, s0, period, steps):
    end = integrate(pair, s0, period, steps)[-1]
    return float(np.linalg.norm(end.position - s0.position) + np.linalg.norm(end.momentum - s0.momentum))


def test_rhs_free_particle(zero_pair):
    dq, dp = hamiltonian_rhs(zero_pair, PhaseState(np.zeros(3), np.array([1.0, 0, 0]), 0.0))
    np.testing.assert_allclose(dq, [1 / math.sqrt(2), 0, 0], rtol=1e-15)
    assert not np.any(dp)


def test_rhs_at_rest_feels_only_E():
    pair = catalog.make("uniform_field", 1.0, B=(0.3, -2.0, 1.0), E=(1.5, 0, 0))
    dq, dp = hamiltonian_rhs(pair, PhaseState(np.array([0.2, 0.1, -1.0]), np.zeros(3), 0.0))
    assert not np.any(dq)
    np.testing.assert_allclose(dp, [1.5, 0, 0], atol=1e-14)


@given(vectors, vectors)
def test_rhs_matches_lorentz_force(p, x):
    # oracle: E + v x B written out from the constant fields
    pair = catalog.make("uniform_field", 1.0, B=(0.4, -1.0, 2.0), E=(0.5, 0.25, -1.0))
    dq, dp = hamiltonian_rhs(pair, PhaseState(x, p, 0.0))
    v = p / math.sqrt(1 + p @ p)
    np.testing.assert_allclose(dq, v, rtol=1e-14, atol=1e-15)
    np.testing.assert_allclose(dp, np.array([0.5, 0.25, -1.0]) + np.cross(v, [0.4, -1.0, 2.0]), atol=1e-12)


def test_rhs_rejects_singular_point():
    pair = catalog.make("coulomb", 1.0)
    with pytest.raises(SingularPoint):
        hamiltonian_rhs(pair, PhaseState(np.zeros(3), np.zeros(3), 0.0))


def test_free_flight_is_straight(zero_pair):
    p0 = np.array([0.5, -2.0, 1.0])
    orbit = integrate(zero_pair, PhaseState(np.zeros(3), p0, 0.0), 3.0, 300)
    for s in orbit:
        np.testing.assert_allclose(s.position, s.time * p0 / math.sqrt(1 + p0 @ p0), atol=1e-13)
        np.testing.assert_array_equal(s.momentum, p0)
    assert len(orbit) == 301
    assert orbit[-1].time == pytest.approx(3.0, rel=1e-14)


def test_gyration_conserves_momentum_modulus():
    pair, s0, period = gyration_setup()
    orbit = integrate(pair, s0, period, 10_000)
    mods = np.array([np.linalg.norm(s.momentum) for s in orbit])
    assert np.max(np.abs(mods - 1.0)) <= 1e-10
    speeds = np.array([np.linalg.norm(s.velocity) for s in orbit])
    assert np.max(np.abs(speeds - speeds[0])) <= 1e-8


def test_gyration_closes_and_is_fourth_order():
    pair, s0, period = gyration_setup()
    assert end_error(pair, s0, period, 10_000) <= 1e-8
    e1, e2 = end_error(pair, s0, period, 1000), end_error(pair, s0, period, 2000)
    assert 3.7 <= math.log2(e1 / e2) <= 4.3


def test_gyration_follows_the_circle():
    pair, s0, period = gyration_setup(p0=0.75, B0=2.0)
    gamma, R = 1.25, 0.375
    omega = 2.0 / gamma
    orbit = integrate(pair, s0, period, 4000)
    t = np.array([s.time for s in orbit])
    x = np.array([s.position for s in orbit])
    # p x B with p along +x1 and B along +x3 pushes towards -x2
    expect = np.stack([R * np.sin(omega * t), R * (np.cos(omega * t) - 1), 0 * t], axis=1)
    np.testing.assert_allclose(x, expect, atol=1e-9)


def test_recovered_speed_below_one():
    # a strong field pushes |p| far above 1, yet the velocity stays subluminal
    pair = catalog.make("uniform_field", 1.0, B=(0, 0, 0), E=(50.0, 0, 0))
    orbit = integrate(pair, PhaseState(np.zeros(3), np.zeros(3), 0.0), 10.0, 1000)
    assert np.linalg.norm(orbit[-1].momentum) == pytest.approx(500.0, rel=1e-12)
    assert all(np.linalg.norm(s.velocity) < 1 for s in orbit)


@pytest.mark.parametrize("x0", [(0, 0, 0), (0.5, 0, 0), (0.3, -0.7, 0.2), (1.5, 1.0, 0)])
def test_momentum_bound_chain(pulse, x0):
    C = lipschitz_and_C(pulse).C
    orbit = integrate(pulse, PhaseState(np.array(x0, float), np.zeros(3), 0.0), 1.0, 2000)
    for s in orbit[1:]:
        assert np.linalg.norm(s.momentum) <= s.time * C * (1 + 1e-9)


def test_singular_encounter_reports_time():
    # Phi = -1 / |x| gives E pointing to the center: a particle at rest falls in
    pair = catalog.make("coulomb", 1.0)
    s0 = PhaseState(np.array([1.0, 0, 0]), np.zeros(3), 0.0)
    with pytest.raises(SingularEncounter) as info:
        integrate(pair, s0, 10.0, 10_000, margin=0.05)
    assert 0 < info.value.time < 10.0


def test_velocity_bound_examples(zero_pair, pulse):
    assert rho_from_C(1.0, 1.0) == pytest.approx(1 / math.sqrt(2), rel=1e-15)
    assert velocity_bound(zero_pair) == 0.0
    C = lipschitz_and_C(pulse).C
    rho = velocity_bound(pulse)
    assert 0 < rho < 1
    assert rho == pytest.approx(C / math.sqrt(1 + C * C), rel=1e-15)


def test_velocity_bound_with_singularities_warns():
    with pytest.warns(UserWarning):
        assert velocity_bound(catalog.make("coulomb", 1.0)) == 1.0


def test_periodicity_residual_of_gyration():
    B0, v = 1.0, 0.6
    gamma = 1 / math.sqrt(1 - v * v)
    omega = B0 / gamma
    T = 2 * math.pi / omega
    R = v / omega
    pair = catalog.make("uniform_field", T, B=(0, 0, B0))
    q = PeriodicTrajectory.from_function(
        lambda t: np.stack([R * np.cos(omega * t), -R * np.sin(omega * t), 0 * t], 1), 64, T)
    s0 = initial_state(q)
    np.testing.assert_allclose(s0.velocity, [0, -v, 0], atol=1e-14)
    assert periodicity_residual(pair, q) <= 1e-8


def test_periodicity_residual_separates_minimizer_from_random(pulse, rng):
    result = minimize(pulse, MinimizeConfig(grid_size=64))
    res_min, orbit = periodicity_residual(pulse, result.trajectory, return_orbit=True)
    assert res_min <= 1e-2
    assert len(orbit) == 64 * 64 + 1
    other = random_trajectory(rng, 64, 1.0, max_speed=0.5, n_modes=4)
    assert periodicity_residual(pulse, other) > 10 * res_min


def test_orbit_csv_layout(zero_pair):
    orbit = integrate(zero_pair, PhaseState(np.zeros(3), np.array([1.0, 0, 0]), 0.0), 1.0, 10)
    lines = orbit_to_csv(orbit, stride=4).strip().splitlines()
    assert lines[0] == "t,x1,x2,x3,p1,p2,p3"
    times = [float(line.split(",")[0]) for line in lines[1:]]
    assert times[0] == 0.0 and times[-1] == pytest.approx(1.0)
    assert len(times) == 4  # 0, 0.4, 0.8 and the final state


def test_no_warning_for_regular_pair(pulse):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        velocity_bound(pulse, grid=(5, 5, 5, 4))
