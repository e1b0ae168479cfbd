"""
Tests for the zenolab.dynamics master equation engine.
"""

import unittest

from unittest import mock

import numpy as np

from zenolab import dynamics
from zenolab.dynamics import (IntegratorConfig, MeasurementKind, ProjectionFrame,
                              ZenoProtocol, convergence_report, evolve, lindblad_rhs,
                              nonselective_measure, run_zeno, selective_measure,
                              top_population)
from zenolab.errors import DimensionError, TruncationError
from zenolab.model import (DensityMatrix, HilbertConfig, ModelParams, QubitState,
                           build_operators, initial_state)


def random_density(dim, rng):
    mat = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = mat @ mat.conj().T
    return rho / np.trace(rho)


class TestIntegratorConfig(unittest.TestCase):
    def test_step_rule(self):
        cfg = IntegratorConfig()
        params = ModelParams(delta=1.0, omega0=1.0, g=0.5, gamma=0.1)
        self.assertAlmostEqual(cfg.max_step(params), 0.02)
        # short intervals use the per-interval minimum
        self.assertEqual(cfg.steps_for(0.1, params), 20)
        self.assertEqual(cfg.steps_for(2.0, params), 100)
        self.assertEqual(cfg.steps_for(0.0, params), 0)

        fast = params.replace(omega0=4.0)
        self.assertEqual(cfg.steps_for(2.0, fast), 400)

    def test_refined(self):
        cfg = IntegratorConfig().refined()
        self.assertEqual(cfg.steps_per_interval, 40)
        self.assertAlmostEqual(cfg.step_factor, 0.01)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            IntegratorConfig(step_factor=0.1)
        with self.assertRaises(ValueError):
            IntegratorConfig(steps_per_interval=5)
        with self.assertRaises(ValueError):
            IntegratorConfig(scheme="euler")


class TestProtocol(unittest.TestCase):
    def test_fields(self):
        protocol = ZenoProtocol(tau=0.5, n_meas=4, measurement="nonselective",
                                pre_evolution_time=1.0)
        self.assertIs(protocol.measurement, MeasurementKind.NONSELECTIVE)
        self.assertAlmostEqual(protocol.total_time, 3.0)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            ZenoProtocol(tau=0.0, n_meas=1)
        with self.assertRaises(ValueError):
            ZenoProtocol(tau=1.0, n_meas=-1)
        with self.assertRaises(ValueError):
            ZenoProtocol(tau=1.0, n_meas=1, pre_evolution_time=-1.0)
        with self.assertRaises(ValueError):
            ZenoProtocol(tau=1.0, n_meas=1, projection_frame="interaction")

    def test_projection_frame(self):
        psi = QubitState(0.6, 0.8)
        lab = ZenoProtocol(tau=0.5, n_meas=2)
        self.assertIs(lab.projection_frame, ProjectionFrame.LAB)
        self.assertEqual(lab.target_at(psi, 1.0, 2.0), psi)

        rotating = ZenoProtocol(tau=0.5, n_meas=2, projection_frame="rotating",
                                target=QubitState.ground())
        self.assertIs(rotating.projection_frame, ProjectionFrame.ROTATING)
        self.assertEqual(rotating.target_at(psi, 1.0, 2.0),
                         QubitState.ground().rotated(2.0, 1.0))


class TestLindblad(unittest.TestCase):
    def setUp(self):
        self.hilbert = HilbertConfig(6)
        self.params = ModelParams(g=0.5, gamma=0.1)
        self.ops = build_operators(self.params, self.hilbert)
        self.rng = np.random.default_rng(7)

    def test_rhs_is_traceless_and_hermitian(self):
        for _ in range(5):
            rho = DensityMatrix(random_density(self.hilbert.dim, self.rng), self.hilbert.n_max)
            drho = lindblad_rhs(rho, self.ops)
            self.assertLess(abs(np.trace(drho.data)), 1e-12)
            self.assertLess(drho.hermiticity_error(), 1e-12)

    def test_ground_vacuum(self):
        hilbert = HilbertConfig(1)
        rho = initial_state(QubitState.ground(), hilbert)

        jc = build_operators(ModelParams(g=0.4, gamma=0.2, variant="jc"), hilbert)
        np.testing.assert_array_equal(lindblad_rhs(rho, jc).data, 0.0)

        # counter-rotating terms couple |g,0> to |e,1>
        rabi = build_operators(ModelParams(g=0.4, gamma=0.2), hilbert)
        expected = np.zeros((4, 4), dtype=complex)
        expected[hilbert.index(0, 1), hilbert.index(1, 0)] = -0.4j
        expected[hilbert.index(1, 0), hilbert.index(0, 1)] = 0.4j
        np.testing.assert_allclose(lindblad_rhs(rho, rabi).data, expected, atol=1e-15)

    def test_gamma_override(self):
        rho = initial_state(QubitState(0.6, 0.8), self.hilbert)
        rho = evolve(rho, 0.5, self.ops, IntegratorConfig())
        closed = lindblad_rhs(rho, self.ops, gamma=0.0)
        expected = -1j * (self.ops.h @ rho.data - rho.data @ self.ops.h)
        np.testing.assert_allclose(closed.data, expected, atol=1e-13)

    def test_dimension_mismatch(self):
        rho = initial_state(QubitState.excited(), HilbertConfig(3))
        with self.assertRaises(DimensionError):
            lindblad_rhs(rho, self.ops)
        with self.assertRaises(DimensionError):
            evolve(rho, 1.0, self.ops, IntegratorConfig())

    def test_evolution_hygiene(self):
        rho = initial_state(QubitState(0.6, 0.8), self.hilbert)
        cfg = IntegratorConfig()
        for _ in range(5):
            before = rho.trace
            rho = evolve(rho, 1.0, self.ops, cfg)
            self.assertLess(abs(rho.trace - before), 1e-9)
            self.assertLess(rho.hermiticity_error(), 1e-10)
        eigvals = np.linalg.eigvalsh(rho.data)
        self.assertGreater(eigvals.min(), -1e-9)

    def test_zero_duration(self):
        rho = initial_state(QubitState(0.6, 0.8), self.hilbert)
        np.testing.assert_array_equal(evolve(rho, 0.0, self.ops, IntegratorConfig()).data,
                                      rho.data)


class TestMeasurements(unittest.TestCase):
    def setUp(self):
        self.hilbert = HilbertConfig(5)
        params = ModelParams(g=0.6, gamma=0.2)
        ops = build_operators(params, self.hilbert)
        rho = initial_state(QubitState(0.6, 0.8), self.hilbert)
        self.rho = evolve(rho, 1.5, ops, IntegratorConfig())

    def test_selective(self):
        psi = QubitState(0.6, 0.8)
        measured = selective_measure(self.rho, psi)
        expected = float(np.real(psi.vector.conj() @ self.rho.qubit_reduced() @ psi.vector))
        self.assertAlmostEqual(measured.trace, expected, places=13)
        self.assertLess(measured.trace, 1.0)
        # idempotent projection
        twice = selective_measure(measured, psi)
        np.testing.assert_allclose(twice.data, measured.data, atol=1e-14)
        np.testing.assert_allclose(measured.qubit_reduced() / measured.trace, psi.projector,
                                   atol=1e-12)

    def test_nonselective(self):
        measured = nonselective_measure(self.rho)
        self.assertAlmostEqual(measured.trace, self.rho.trace, places=14)
        blocks = measured.blocks
        self.assertEqual(np.abs(blocks[0, :, 1, :]).max(), 0.0)
        self.assertEqual(np.abs(blocks[1, :, 0, :]).max(), 0.0)
        np.testing.assert_array_equal(blocks[0, :, 0, :], self.rho.blocks[0, :, 0, :])
        self.assertAlmostEqual(measured.excited_population(), self.rho.excited_population(),
                               places=14)

    def test_nonselective_factorized(self):
        measured = nonselective_measure(self.rho, factorize=True)
        self.assertAlmostEqual(measured.trace, self.rho.trace, places=13)
        qubit = np.diag(np.diag(self.rho.qubit_reduced()))
        np.testing.assert_allclose(measured.qubit_reduced(), qubit, atol=1e-13)
        np.testing.assert_allclose(measured.mode_reduced(), self.rho.mode_reduced(),
                                   atol=1e-13)
        expected = np.kron(qubit, self.rho.mode_reduced()) / self.rho.trace
        np.testing.assert_allclose(measured.data, expected, atol=1e-14)

    def test_top_population(self):
        rho = initial_state(QubitState.excited(), self.hilbert)
        self.assertEqual(top_population(rho), 0.0)
        self.assertGreater(top_population(self.rho), 0.0)


class TestRunZeno(unittest.TestCase):
    def setUp(self):
        self.params = ModelParams(g=0.5, gamma=0.1)
        self.psi = QubitState(0.6, 0.8)

    def test_decoupled_survival(self):
        params = ModelParams(g=0.0, gamma=0.1)
        protocol = ZenoProtocol(tau=0.7, n_meas=5)
        series = run_zeno(params, QubitState.excited(), protocol)
        self.assertEqual(series.probs, [1.0] * 6)
        self.assertEqual(series.n_meas, 5)

    def test_projection_frames_without_coupling(self):
        params = ModelParams(g=0.0, gamma=0.1)
        rotating = ZenoProtocol(tau=0.7, n_meas=4, projection_frame=ProjectionFrame.ROTATING)
        series = run_zeno(params, self.psi, rotating)
        np.testing.assert_allclose(series.probs, 1.0, atol=1e-9)

        # the lab frame projection loses the precessed part of the state
        lab = run_zeno(params, self.psi, ZenoProtocol(tau=0.7, n_meas=4))
        single = 0.36 ** 2 + 0.64 ** 2 + 2 * 0.36 * 0.64 * np.cos(0.7)
        np.testing.assert_allclose(lab.probs, single ** np.arange(5), atol=1e-9)

    def test_series_layout(self):
        protocol = ZenoProtocol(tau=0.5, n_meas=8)
        series = run_zeno(self.params, self.psi, protocol)
        self.assertEqual(len(series.probs), 9)
        self.assertEqual(series.probs[0], 1.0)
        np.testing.assert_allclose(series.times, 0.5 * np.arange(9), atol=1e-14)
        self.assertTrue(series.converged)
        self.assertIs(series.protocol, protocol)

    def test_survival_monotone(self):
        protocol = ZenoProtocol(tau=0.3, n_meas=30)
        for variant in ("rabi", "jc"):
            params = self.params.replace(variant=variant)
            probs = np.asarray(run_zeno(params, self.psi, protocol).probs)
            self.assertTrue(np.all(np.diff(probs) <= 1e-12))
            self.assertTrue(np.all(probs > 0))

    def test_truncated_series(self):
        series = run_zeno(self.params, self.psi, ZenoProtocol(tau=0.5, n_meas=6))
        short = series.truncated(3)
        self.assertEqual(short.probs, series.probs[:4])
        self.assertEqual(short.n_meas, 3)

    def test_nested_checkpoints(self):
        hilbert = HilbertConfig(12)
        long_run = run_zeno(self.params, self.psi, ZenoProtocol(tau=0.4, n_meas=8),
                            hilbert=hilbert, adaptive=False)
        short_run = run_zeno(self.params, self.psi, ZenoProtocol(tau=0.4, n_meas=4),
                             hilbert=hilbert, adaptive=False)
        np.testing.assert_allclose(long_run.probs[:5], short_run.probs, atol=1e-15)

    def test_nonselective_keeps_trace(self):
        protocol = ZenoProtocol(tau=0.5, n_meas=6, measurement=MeasurementKind.NONSELECTIVE)
        series = run_zeno(self.params, self.psi, protocol)
        np.testing.assert_allclose(series.probs, 1.0, atol=1e-9)

    def test_target_projection(self):
        protocol = ZenoProtocol(tau=0.5, n_meas=3, target=QubitState.ground())
        series = run_zeno(self.params, QubitState.excited(), protocol)
        # |e> has no overlap with the target at t = 0 but decays into it
        self.assertGreater(series.probs[1], 0.0)
        self.assertLess(series.probs[1], 0.5)

    def test_trajectory(self):
        protocol = ZenoProtocol(tau=0.5, n_meas=3, measurement=MeasurementKind.NONSELECTIVE,
                                pre_evolution_time=1.0)
        series = run_zeno(self.params, QubitState.ground(), protocol, samples_per_interval=4)
        traj = series.trajectory
        # t = 0, 2 intervals of relaxation and 3 measured intervals
        self.assertEqual(len(traj.times), 1 + 4 * 2 + 4 * 3)
        self.assertAlmostEqual(traj.times[-1], 2.5, places=12)
        self.assertTrue(np.all(np.diff(traj.times) > 0))
        self.assertAlmostEqual(traj.excited[-1], series.excited[-1], places=14)
        self.assertEqual(series.times[0], 1.0)

    def test_adaptive_truncation(self):
        protocol = ZenoProtocol(tau=1.0, n_meas=2)
        series = run_zeno(self.params, QubitState.excited(), protocol, hilbert=HilbertConfig(1))
        self.assertGreater(series.n_max, 1)
        self.assertTrue(series.converged)

        fixed = run_zeno(self.params, QubitState.excited(), protocol, hilbert=HilbertConfig(1),
                         adaptive=False)
        self.assertEqual(fixed.n_max, 1)
        self.assertFalse(fixed.converged)

    def test_truncation_error(self):
        protocol = ZenoProtocol(tau=1.0, n_meas=2)
        with mock.patch.object(dynamics, "N_MAX_CEILING", 2):
            with self.assertRaises(TruncationError) as ctx:
                run_zeno(self.params, QubitState.excited(), protocol, hilbert=HilbertConfig(1))
        self.assertEqual(ctx.exception.exit_code, 3)
        self.assertEqual(ctx.exception.details[0]["n_max"], 2)


class TestConvergenceReport(unittest.TestCase):
    def test_report(self):
        params = ModelParams(g=0.5, gamma=0.1)
        protocol = ZenoProtocol(tau=0.5, n_meas=4)
        report = convergence_report(params, QubitState.excited(), protocol)
        for key in ("n_max", "n_max_doubled", "step_halving_delta",
                    "truncation_doubling_delta", "tolerance", "passed"):
            self.assertIn(key, report)
        self.assertEqual(report["n_max_doubled"], 2 * report["n_max"])
        self.assertLess(report["step_halving_delta"], 1e-6)
        self.assertLess(report["truncation_doubling_delta"], 1e-6)
        self.assertTrue(report["passed"])
