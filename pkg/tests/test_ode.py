import numpy as np
import pytest

from dystro_front.equilibria import healthy_equilibrium, pathological_equilibria
from dystro_front.errors import DomainError, InvalidParameter
from dystro_front.linear import temporal_growth
from dystro_front.model import State
from dystro_front.ode import DEFAULT_PERTURBATION, _police, integrate, solve_system

from conftest import draw_many, base_params


def _perturbed_healthy(p, eps=DEFAULT_PERTURBATION):
    h0 = healthy_equilibrium(p)
    return State(h0.h, eps, 0.0, 0.0)


class TestBasics:
    def test_healthy_fixed_point(self):
        p = base_params()
        traj = integrate(healthy_equilibrium(p), p, 20.0)
        assert np.max(np.abs(traj.values - traj.values[0])) <= 1e-14
        assert traj.invariant_violations == []

    def test_exponential_decay(self):
        times, values = solve_system(lambda t, y: -2.0 * y, [1.0], 3.0, rtol=1e-10, atol=1e-14)
        np.testing.assert_allclose(values[:, 0], np.exp(-2.0 * times), rtol=1e-8)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            integrate(State(0.8, 0.5, 0.0, 0.0), base_params(), 1.0)

    def test_bad_horizon(self):
        with pytest.raises(InvalidParameter):
            integrate(healthy_equilibrium(base_params()), base_params(), 0.0)

    def test_sample_grid(self):
        traj = integrate(_perturbed_healthy(base_params()), base_params(), 5.0, n_out=11)
        np.testing.assert_allclose(traj.times, np.linspace(0, 5, 11))
        assert traj.values.shape == (11, 4)
        assert traj.states[0] == _perturbed_healthy(base_params())


class TestThresholdTransition:
    def test_below_threshold_decays_at_leading_rate(self):
        # just below threshold the slowest mode decays like exp(lambda_plus t), lambda_plus ~ -0.041
        p = base_params(alpha=30.0)
        traj = integrate(_perturbed_healthy(p), p, 200.0, rtol=1e-10, atol=1e-14, n_out=201)
        dev = np.max(np.abs(traj.values - healthy_equilibrium(p).as_array()), axis=1)
        slope = np.polyfit(traj.times[100:], np.log(dev[100:]), 1)[0]
        assert slope == pytest.approx(temporal_growth(p)[0], rel=1e-3)
        assert dev[-1] < 1e-6
        assert np.all(np.diff(dev[20:]) < 0)

    def test_above_threshold_invades(self):
        p = base_params(alpha=50.0)
        (eq,) = pathological_equilibria(p)
        final = integrate(_perturbed_healthy(p), p, 50.0).final.as_array()
        np.testing.assert_allclose(final, eq.state.as_array(), atol=1e-6)

    @pytest.mark.parametrize("alpha", [30.0, 50.0])
    def test_halving_rtol(self, alpha):
        p = base_params(alpha=alpha)
        u0 = _perturbed_healthy(p)
        rtol = 1e-8
        a = integrate(u0, p, 50.0, rtol=rtol).final.as_array()
        b = integrate(u0, p, 50.0, rtol=rtol / 2).final.as_array()
        assert np.max(np.abs(a - b)) < 10 * rtol


class TestInvariance:
    def test_random_states_and_parameters(self, rng):
        for p in draw_many(1000, seed=21):
            h = rng.uniform(0, 1)
            d = rng.uniform(0, 1 - h)
            u0 = State(h, d, rng.uniform(0, 1), rng.uniform(0, 1))
            traj = integrate(u0, p, 2.0, n_out=40)
            assert traj.values.min() >= -1e-9
            assert np.max(traj.values[:, 0] + traj.values[:, 1]) <= 1.0 + 1e-9
            assert all(mag <= 1e-9 for _, _, mag in traj.invariant_violations)


class TestFrozenDamageRelaxation:
    def test_closed_form(self):
        # with d held fixed, m and c relax linearly to d and (r / mu) d
        p = base_params()
        d = 0.2

        def fun(_t, y):
            m, c = y
            return [p.nu * (d - m), p.r * d - p.mu * c]

        times, values = solve_system(fun, [0.0, 0.0], 2.0, rtol=1e-10, atol=1e-13)
        m_exact = d * (1 - np.exp(-p.nu * times))
        c_exact = p.r / p.mu * d * (1 - np.exp(-p.mu * times))
        np.testing.assert_allclose(values[:, 0], m_exact, atol=1e-9)
        np.testing.assert_allclose(values[:, 1], c_exact, atol=1e-9)


def test_undershoot_policy():
    times = np.array([0.0, 1.0])
    values = np.array([[0.5, -5e-11, 0.0, 0.0], [0.6, 0.5, -1e-6, 0.0]])
    violations = _police(times, values, atol=1e-10)
    assert values[0, 1] == 0.0
    assert values[1, 2] == -1e-6
    assert violations == [(1.0, "m", 1e-6), (1.0, "h+d", pytest.approx(0.1))]
