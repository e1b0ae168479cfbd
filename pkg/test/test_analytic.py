"""
Tests for the closed-form references in zenolab.analytic.
"""

import math
import unittest

import numpy as np

from scipy import integrate

from zenolab.analytic import (ContinuousLimitRate, RWAnalytic, RateEquationModel,
                              continuous_survival, continuous_w, kka_series,
                              kka_survival_finite_tau, kka_w_continuous, kka_w_finite_tau,
                              rate_equation_run, relaxation_rates, relaxation_rates_quadrature,
                              rw_alpha, rw_first_interval_general, rw_survival_excited)
from zenolab.dynamics import MeasurementKind, ProjectionFrame, ZenoProtocol, run_zeno
from zenolab.model import HilbertConfig, ModelParams, QubitState


class TestRotatingWave(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams(g=0.3, gamma=0.1, omega0=1.2, variant="jc")

    def test_initial_amplitude(self):
        self.assertAlmostEqual(complex(rw_alpha(0.0, self.params)), 1.0, places=14)

    def test_branches_agree(self):
        rw = RWAnalytic(self.params)
        times = np.linspace(0.0, 20.0, 41)
        np.testing.assert_allclose(rw.alpha(times, branch=-1), rw.alpha(times), atol=1e-12)

    def test_vectorized(self):
        times = np.array([0.5, 1.0, 2.0])
        values = rw_alpha(times, self.params)
        self.assertEqual(values.shape, (3,))
        self.assertAlmostEqual(complex(values[1]), complex(rw_alpha(1.0, self.params)),
                               places=14)

    def test_decoupled(self):
        params = self.params.replace(g=0.0)
        times = np.linspace(0.0, 10.0, 11)
        np.testing.assert_allclose(np.abs(rw_alpha(times, params)), 1.0, atol=1e-12)

    def test_double_root(self):
        # resonance with g = gamma / 2 makes the square root vanish
        params = ModelParams(g=0.05, gamma=0.1, variant="jc")
        nearby = params.replace(g=0.05 * (1.0 + 1e-7))
        for t in (0.5, 3.0, 12.0):
            self.assertAlmostEqual(complex(rw_alpha(t, params)),
                                   complex(rw_alpha(t, nearby)), places=5)

    def test_survival_excited(self):
        tau = 0.4
        single = abs(complex(rw_alpha(tau, self.params))) ** 2
        self.assertAlmostEqual(rw_survival_excited(tau, 3, self.params), single ** 3,
                               places=14)
        self.assertEqual(rw_survival_excited(tau, 0, self.params), 1.0)
        self.assertAlmostEqual(rw_first_interval_general(QubitState.excited(), tau,
                                                         self.params), single, places=14)
        with self.assertRaises(ValueError):
            rw_survival_excited(tau, -1, self.params)

    def test_first_interval_matches_engine(self):
        psi = QubitState(0.8, 0.6)
        rotating = ZenoProtocol(tau=0.1, n_meas=1, projection_frame=ProjectionFrame.ROTATING)
        for g in (0.06, 0.6):
            params = ModelParams(g=g, gamma=0.03, variant="jc")
            series = run_zeno(params, psi, rotating, hilbert=HilbertConfig(6), adaptive=False)
            self.assertAlmostEqual(series.probs[1],
                                   rw_first_interval_general(psi, 0.1, params), delta=1e-6)

        # the lab frame projection sees the free qubit precession
        params = ModelParams(g=0.06, gamma=0.03, variant="jc")
        lab = run_zeno(params, psi, ZenoProtocol(tau=0.1, n_meas=1),
                       hilbert=HilbertConfig(6), adaptive=False)
        self.assertGreater(abs(lab.probs[1] - rw_first_interval_general(psi, 0.1, params)),
                           1e-3)

    def test_ground_state_survives(self):
        for tau in (0.1, 1.0, 7.5):
            self.assertEqual(rw_first_interval_general(QubitState.ground(), tau, self.params),
                             1.0)

    def test_amplitude_ode(self):
        # one-excitation amplitudes in the interaction picture
        for g, gamma, omega0 in ((0.06, 0.03, 1.0), (0.3, 0.1, 1.2)):
            params = ModelParams(g=g, gamma=gamma, omega0=omega0, variant="jc")
            detuning = omega0 - params.delta

            def rhs(t, y):
                c_e, c_g = y
                return [-1j * g * np.exp(-1j * detuning * t) * c_g,
                        -1j * g * np.exp(1j * detuning * t) * c_e - gamma * c_g]

            times = np.linspace(0.0, 30.0, 61)
            sol = integrate.solve_ivp(rhs, (0.0, 30.0), np.array([1.0, 0.0], dtype=complex),
                                      method="DOP853", t_eval=times, rtol=1e-12, atol=1e-13)
            np.testing.assert_allclose(rw_alpha(times, params), sol.y[0], atol=1e-8)

    def test_amplitude_bounded(self):
        times = np.linspace(0.0, 50.0, 501)
        for g in (0.0, 0.07, 0.6, 2.0):
            for gamma in (0.0, 0.03, 0.1, 1.0):
                for omega0 in (0.5, 1.0, 2.0):
                    params = ModelParams(g=g, gamma=gamma, omega0=omega0, variant="jc")
                    self.assertLessEqual(np.max(np.abs(rw_alpha(times, params))),
                                         1.0 + 1e-12, msg=repr(params))

    def test_excited_engine_series(self):
        protocol = ZenoProtocol(tau=0.5, n_meas=6)
        series = run_zeno(self.params, QubitState.excited(), protocol,
                          hilbert=HilbertConfig(6), adaptive=False)
        for n, prob in enumerate(series.probs):
            self.assertAlmostEqual(prob, rw_survival_excited(0.5, n, self.params), delta=1e-7)


class TestContinuousLimit(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams(g=0.5, gamma=0.1)

    def test_excited_state(self):
        times = np.linspace(0.0, 30.0, 61)
        np.testing.assert_allclose(continuous_w(times, QubitState.excited(), self.params),
                                   0.25, atol=1e-14)
        self.assertAlmostEqual(continuous_survival(10.0, 0.1, QubitState.excited(),
                                                   self.params),
                               math.exp(-0.1 * 0.25 * 10.0), places=9)

    def test_initial_value(self):
        psi = QubitState(0.6, 0.8)
        # (delta/2)^2 (1 - sz^2) + g^2 (1 - sx^2)
        self.assertAlmostEqual(continuous_w(0.0, psi, self.params), 0.25, places=13)
        self.assertIsInstance(continuous_w(0.0, psi, self.params), float)

    def test_non_negative_and_stationary(self):
        psi = QubitState(0.6, 0.8)
        rate = ContinuousLimitRate(self.params, psi)
        values = rate.w(np.linspace(0.0, 100.0, 401))
        self.assertTrue(np.all(values >= 0.0))
        self.assertAlmostEqual(rate.w(250.0), rate.w_infinity(), places=8)

    def test_eta_envelope(self):
        psi = QubitState(0.6, 0.8)
        rate = ContinuousLimitRate(self.params, psi)
        times = np.linspace(0.0, 50.0, 101)
        deviation = np.abs(rate.eta(times) - rate.eta_infinity())
        np.testing.assert_allclose(deviation,
                                   abs(rate.eta_infinity()) * np.exp(-0.1 * times),
                                   rtol=1e-10)

    def test_interval_average(self):
        psi = QubitState(0.6, 0.8)
        rate = ContinuousLimitRate(self.params, psi)
        tau = 0.5
        total = sum(rate.interval_average(tau, n) for n in range(4)) * tau
        self.assertAlmostEqual(total, rate.integral(0.0, 4 * tau), places=10)
        self.assertEqual(rate.integral(1.0, 1.0), 0.0)


class TestBathReset(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams(g=0.5, gamma=0.1)
        self.hilbert = HilbertConfig(12)

    def test_continuous_values(self):
        self.assertAlmostEqual(kka_w_continuous(QubitState.excited(), self.params), 0.25)
        self.assertAlmostEqual(kka_w_continuous(QubitState(0.6, 0.8), self.params),
                               0.25 * (1.0 - 0.28 ** 2) + 0.25, places=14)

    def test_short_interval_limit(self):
        for psi in (QubitState.excited(), QubitState(0.6, 0.8)):
            w_short = kka_w_finite_tau(psi, 0.01, self.params, hilbert=self.hilbert)
            self.assertAlmostEqual(w_short, kka_w_continuous(psi, self.params), delta=0.02)

    def test_series_is_geometric(self):
        psi = QubitState(0.6, 0.8)
        single = kka_survival_finite_tau(psi, 1.0, self.params, hilbert=self.hilbert)
        series = kka_series(psi, 1.0, 5, self.params, hilbert=self.hilbert)
        self.assertEqual(series.probs[0], 1.0)
        for k, prob in enumerate(series.probs):
            self.assertAlmostEqual(prob, single ** k, places=15)
        self.assertEqual(series.times[-1], 5.0)

    def test_invalid_tau(self):
        with self.assertRaises(ValueError):
            kka_survival_finite_tau(QubitState.excited(), 0.0, self.params)


class TestRateEquation(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams(g=0.3, gamma=0.1, omega0=1.5)

    def test_closed_form_matches_quadrature(self):
        for t in (0.5, 2.0, 10.0):
            closed = relaxation_rates(t, self.params)
            quad = relaxation_rates_quadrature(t, self.params)
            self.assertAlmostEqual(closed[0], quad[0], delta=1e-6)
            self.assertAlmostEqual(closed[1], quad[1], delta=1e-6)

    def test_short_time_slope(self):
        r_e, r_g = relaxation_rates(1e-6, self.params)
        self.assertAlmostEqual(r_e / 1e-6, 2 * 0.3 ** 2, places=6)
        self.assertAlmostEqual(r_g / 1e-6, 2 * 0.3 ** 2, places=6)
        self.assertEqual(float(relaxation_rates(0.0, self.params)[0]), 0.0)

    def test_undamped_resonance(self):
        params = ModelParams(g=0.2, gamma=0.0)
        r_e, _ = relaxation_rates(3.0, params)
        self.assertAlmostEqual(float(r_e), 2 * 0.04 * 3.0, places=14)

    def test_long_time_limit(self):
        model = RateEquationModel(self.params)
        r_e, _ = model.rates(500.0)
        detuning = 0.5
        expected = 2 * 0.09 * 0.1 / (0.1 ** 2 + detuning ** 2)
        self.assertAlmostEqual(float(r_e), expected, places=10)

    def test_selective_rejected(self):
        protocol = ZenoProtocol(tau=1.0, n_meas=2)
        with self.assertRaises(ValueError):
            rate_equation_run(self.params, protocol, [0.0, 1.0, 2.0])

    def test_descending_grid_rejected(self):
        protocol = ZenoProtocol(tau=1.0, n_meas=2, measurement=MeasurementKind.NONSELECTIVE)
        with self.assertRaises(ValueError):
            rate_equation_run(self.params, protocol, [0.0, 2.0, 1.0])

    def test_decoupled_populations(self):
        params = self.params.replace(g=0.0)
        protocol = ZenoProtocol(tau=0.5, n_meas=4, measurement=MeasurementKind.NONSELECTIVE)
        grid = np.linspace(0.0, 2.0, 17)
        pops = rate_equation_run(params, protocol, grid, initial_excited=0.7)
        np.testing.assert_allclose(pops.rho_ee, 0.7, atol=1e-12)
        np.testing.assert_allclose(np.add(pops.rho_ee, pops.rho_gg), 1.0, atol=1e-15)

    def test_reset_only_matters_with_measurements(self):
        protocol = ZenoProtocol(tau=0.5, n_meas=4, measurement=MeasurementKind.NONE)
        grid = np.linspace(0.0, 2.0, 9)
        reset = rate_equation_run(self.params, protocol, grid, reset=True, initial_excited=1.0)
        running = rate_equation_run(self.params, protocol, grid, reset=False,
                                    initial_excited=1.0)
        np.testing.assert_allclose(reset.rho_ee, running.rho_ee, atol=1e-14)

        measured = ZenoProtocol(tau=0.5, n_meas=4, measurement=MeasurementKind.NONSELECTIVE)
        reset = rate_equation_run(self.params, measured, grid, reset=True, initial_excited=1.0)
        running = rate_equation_run(self.params, measured, grid, reset=False,
                                    initial_excited=1.0)
        self.assertEqual(reset.rho_ee[0], 1.0)
        self.assertGreater(abs(reset.rho_ee[-1] - running.rho_ee[-1]), 1e-6)
