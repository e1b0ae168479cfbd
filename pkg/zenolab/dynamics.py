"""
The 'dynamics' module integrates the exact master equation of the qubit and
the damped single mode,

    d rho / dt = -i [H, rho] - gamma (a^dag a rho + rho a^dag a - 2 a rho a^dag),

and applies selective or non-selective measurements at the end of every
Zeno interval.

The state is never renormalized after a selective measurement: the running
trace is the joint survival probability.
"""

import enum
import logging
import math

from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .errors import DimensionError, IntegratorError, TruncationError
from .model import (DensityMatrix, HilbertConfig, QubitState, build_operators,
                    initial_state)

logger = logging.getLogger(__name__)

N_MAX_CEILING = 128
TOP_POPULATION_THRESHOLD = 1e-8


class MeasurementKind(enum.Enum):
    SELECTIVE = "selective"
    NONSELECTIVE = "nonselective"
    NONE = "none"


class ProjectionFrame(enum.Enum):
    """
    Frame in which selective measurements project on the target state.
    ROTATING projects on the target co-rotating with the free qubit, i.e.
    on exp(-i (delta/2) sz t)|psi> at the measurement time t.
    """
    LAB = "lab"
    ROTATING = "rotating"


@dataclass(frozen=True)
class IntegratorConfig(object):
    """
    Fixed step RK4 settings.

    The step used for a duration T is T / k with
    k = max(steps_per_interval, ceil(T / h_max)), so measurement instants fall
    on grid points exactly. h_max is *step_hint* when given, otherwise
    step_factor / max(delta, omega0, g, gamma).
    """
    scheme: str = "fixed-rk4"
    steps_per_interval: int = 20
    step_factor: float = 0.02
    step_hint: Optional[float] = None
    convergence_tol: float = 1e-6

    def __post_init__(self):
        if self.scheme != "fixed-rk4":
            raise ValueError("unsupported integrator scheme %r" % self.scheme)
        if self.steps_per_interval < 10:
            raise ValueError("steps_per_interval must be >= 10")
        if not 0 < self.step_factor <= 0.05:
            raise ValueError("step_factor must lie in (0, 0.05]")
        if self.step_hint is not None and self.step_hint <= 0:
            raise ValueError("step_hint must be positive")

    def max_step(self, params):
        h_max = self.step_factor / params.max_rate
        if self.step_hint is not None:
            h_max = min(h_max, self.step_hint)
        return h_max

    def steps_for(self, duration, params, minimum=None):
        """
        Number of RK4 steps used to cover *duration*.
        """
        if duration <= 0:
            return 0
        if minimum is None:
            minimum = self.steps_per_interval
        return max(minimum, int(math.ceil(duration / self.max_step(params) - 1e-9)))

    def refined(self):
        """
        Returns a copy with half the step size.
        """
        hint = None if self.step_hint is None else 0.5 * self.step_hint
        return replace(self, steps_per_interval=2 * self.steps_per_interval,
                       step_factor=0.5 * self.step_factor, step_hint=hint)


@dataclass(frozen=True)
class ZenoProtocol(object):
    """
    *n_meas* measurements separated by *tau*, after a measurement free
    evolution of *pre_evolution_time*. Selective measurements project on
    *target*, or on the initial qubit state when *target* is None.
    *factorize* selects the full factorization reading of the non-selective
    measurement.
    *projection_frame* selects the frame of the selective projection.
    """
    tau: float
    n_meas: int
    measurement: MeasurementKind = MeasurementKind.SELECTIVE
    target: Optional[QubitState] = None
    pre_evolution_time: float = 0.0
    factorize: bool = False
    projection_frame: ProjectionFrame = ProjectionFrame.LAB

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive, got %r" % self.tau)
        if self.n_meas < 0:
            raise ValueError("n_meas must be >= 0")
        if self.pre_evolution_time < 0:
            raise ValueError("pre_evolution_time must be >= 0")
        if not isinstance(self.measurement, MeasurementKind):
            object.__setattr__(self, "measurement", MeasurementKind(self.measurement))
        if not isinstance(self.projection_frame, ProjectionFrame):
            object.__setattr__(self, "projection_frame",
                               ProjectionFrame(self.projection_frame))

    def target_at(self, psi, t, delta):
        """
        Returns the projection target of a selective measurement at time *t*.
        """
        target = self.target if self.target is not None else psi
        if self.projection_frame is ProjectionFrame.ROTATING:
            return target.rotated(delta, t)
        return target

    @property
    def total_time(self):
        return self.pre_evolution_time + self.n_meas * self.tau


@dataclass
class Trajectory(object):
    """
    Densely sampled excited population and trace.
    """
    times: List[float] = field(default_factory=list)
    excited: List[float] = field(default_factory=list)
    trace: List[float] = field(default_factory=list)

    def record(self, time, rho):
        self.times.append(time)
        self.excited.append(rho.excited_population())
        self.trace.append(rho.trace)


@dataclass
class SurvivalSeries(object):
    """
    Survival probabilities P(n tau) for n = 0..N together with the
    excited population right after each measurement.
    """
    tau: float
    times: List[float]
    probs: List[float]
    params: object
    n_max: int
    converged: bool
    protocol: Optional[ZenoProtocol] = None
    excited: List[float] = field(default_factory=list)
    max_top_population: float = 0.0
    trajectory: Optional[Trajectory] = None

    @property
    def n_meas(self):
        return len(self.probs) - 1

    def truncated(self, n_meas):
        """
        Returns the series restricted to the first *n_meas* measurements.
        """
        stop = n_meas + 1
        return replace(self, times=self.times[:stop], probs=self.probs[:stop],
                       excited=self.excited[:stop], trajectory=None)


def _check_dims(rho, ops):
    if rho.dim != ops.dim:
        raise DimensionError("state dimension %d does not match operators of dimension %d"
                             % (rho.dim, ops.dim))


def _rhs(data, ops):
    h_eff = ops.h_eff
    out = -1j * (h_eff @ data - data @ h_eff.conj().T)
    if ops.gamma:
        out += 2.0 * ops.gamma * (ops.a @ data @ ops.a_dag)
    return out


def lindblad_rhs(rho, ops, gamma=None):
    """
    Evaluates -i[H, rho] - gamma (n rho + rho n - 2 a rho a^dag).

    :param rho: DensityMatrix
    :param ops: OperatorSet
    :param gamma: optional damping rate overriding ops.gamma
    :return: DensityMatrix holding the time derivative
    """
    _check_dims(rho, ops)
    if gamma is not None and gamma != ops.gamma:
        ops = build_operators(ops.params.replace(gamma=gamma), ops.cfg)
    return DensityMatrix(_rhs(rho.data, ops), rho.n_max)


def _rk4_step(x, fun, h):
    k1 = fun(x)
    k2 = fun(x + 0.5 * h * k1)
    k3 = fun(x + 0.5 * h * k2)
    k4 = fun(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate(data, fun, duration, steps, hermitian, sample=None, every=0, t0=0.0):
    if steps == 0:
        return data
    h = duration / steps
    for step in range(1, steps + 1):
        data = _rk4_step(data, fun, h)
        if hermitian:
            data = 0.5 * (data + data.conj().T)
        if sample is not None and every and step % every == 0:
            sample(t0 + step * h, data)
    if not np.all(np.isfinite(data)):
        raise IntegratorError("non-finite state after %d RK4 steps of size %.3e" % (steps, h))
    return data


def evolve(rho, duration, ops, cfg, steps=None):
    """
    Propagates *rho* by *duration* with fixed-step RK4 and re-symmetrizes the
    state after every step.

    :param rho: DensityMatrix
    :param duration: non-negative time
    :param ops: OperatorSet
    :param cfg: IntegratorConfig
    :param steps: explicit number of steps, overrides the config
    :return: DensityMatrix
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    _check_dims(rho, ops)
    if steps is None:
        steps = cfg.steps_for(duration, ops.params)
    data = _integrate(rho.data.copy(), lambda x: _rhs(x, ops), duration, steps, True)
    return DensityMatrix(data, rho.n_max)


def evolve_amplitudes(vec, duration, ops, cfg, steps=None):
    """
    Propagates a state vector under the non-Hermitian h_eff,
    d psi / dt = -i h_eff psi. The norm decays with the mode loss.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    if vec.shape != (ops.dim,):
        raise DimensionError("vector of shape %s does not match dimension %d"
                             % (vec.shape, ops.dim))
    if steps is None:
        steps = cfg.steps_for(duration, ops.params)
    h_eff = ops.h_eff
    return _integrate(np.asarray(vec, dtype=complex).copy(), lambda x: -1j * (h_eff @ x),
                      duration, steps, False)


def selective_measure(rho, psi):
    """
    Applies P_S rho P_S with P_S = |psi><psi| x I. The result equals
    |psi><psi| x <psi|rho|psi> and is not renormalized; its trace is the
    probability of the measurement outcome.
    """
    blocks = rho.blocks
    vec = psi.vector
    mode_block = np.einsum("i,injm,j->nm", vec.conj(), blocks, vec)
    data = np.kron(psi.projector, mode_block)
    return DensityMatrix(data, rho.n_max)


def nonselective_measure(rho, factorize=False):
    """
    Applies the outcome-summed qubit measurement
    (P_e x I) rho (P_e x I) + (P_g x I) rho (P_g x I),
    which erases qubit coherences and keeps the qubit-mode block
    correlations. With *factorize* the state is replaced by
    diag(Tr_A rho) x Tr_S rho / Tr rho instead.
    """
    if factorize:
        trace = rho.trace
        if trace <= 0:
            return rho.copy()
        qubit = np.diag(np.diag(rho.qubit_reduced()))
        mode = rho.mode_reduced()
        return DensityMatrix(np.kron(qubit, mode) / trace, rho.n_max)

    blocks = rho.blocks.copy()
    blocks[0, :, 1, :] = 0.0
    blocks[1, :, 0, :] = 0.0
    dim = rho.dim
    return DensityMatrix(blocks.reshape(dim, dim), rho.n_max)


def top_population(rho):
    """
    Population of the two highest Fock levels, summed over the qubit.
    """
    pops = rho.fock_populations()
    return float(pops[-2:].sum())


class _TruncationExceeded(Exception):
    def __init__(self, population):
        super(_TruncationExceeded, self).__init__(population)
        self.population = population


def _run_once(params, psi, protocol, cfg, hilbert, abort_on_truncation, samples_per_interval):
    ops = build_operators(params, hilbert)
    rho = initial_state(psi, hilbert)
    tau = protocol.tau

    trajectory = None
    sample = None
    if samples_per_interval:
        trajectory = Trajectory()
        trajectory.record(0.0, rho)

    max_top = 0.0

    def checkpoint(state):
        top = top_population(state)
        if top > TOP_POPULATION_THRESHOLD and abort_on_truncation:
            raise _TruncationExceeded(top)
        return top

    fun = lambda x: _rhs(x, ops)
    pre = protocol.pre_evolution_time
    if pre > 0:
        steps = cfg.steps_for(pre, params, minimum=1)
        every = 0
        if trajectory is not None:
            # sample the relaxation phase on the same spacing as the intervals
            per_tau = max(1, int(round(pre / tau)))
            steps = int(math.ceil(steps / float(per_tau * samples_per_interval))) \
                * per_tau * samples_per_interval
            every = steps // (per_tau * samples_per_interval)
            sample = lambda t, data: trajectory.record(t, DensityMatrix(data, hilbert.n_max))
        data = _integrate(rho.data.copy(), fun, pre, steps, True, sample, every, 0.0)
        rho = DensityMatrix(data, hilbert.n_max)
        max_top = max(max_top, checkpoint(rho))

    steps = cfg.steps_for(tau, params)
    every = 0
    if trajectory is not None:
        steps = int(math.ceil(steps / float(samples_per_interval))) * samples_per_interval
        every = steps // samples_per_interval

    times = [pre]
    probs = [1.0]
    excited = [rho.excited_population()]
    for n in range(1, protocol.n_meas + 1):
        t0 = pre + (n - 1) * tau
        if trajectory is not None:
            sample = lambda t, data: trajectory.record(t, DensityMatrix(data, hilbert.n_max))
        data = _integrate(rho.data, fun, tau, steps, True, sample, every, t0)
        rho = DensityMatrix(data, hilbert.n_max)
        max_top = max(max_top, checkpoint(rho))

        if protocol.measurement is MeasurementKind.SELECTIVE:
            rho = selective_measure(rho, protocol.target_at(psi, pre + n * tau,
                                                            params.delta))
        elif protocol.measurement is MeasurementKind.NONSELECTIVE:
            rho = nonselective_measure(rho, factorize=protocol.factorize)

        times.append(pre + n * tau)
        probs.append(rho.trace)
        excited.append(rho.excited_population())
        if trajectory is not None:
            # replace the pre-measurement sample at the measurement instant
            trajectory.times[-1] = times[-1]
            trajectory.excited[-1] = excited[-1]
            trajectory.trace[-1] = probs[-1]
        logger.debug("interval %d: P=%.12g top=%.3e", n, probs[-1], max_top)

    return SurvivalSeries(tau=tau, times=times, probs=probs, params=params,
                          n_max=hilbert.n_max,
                          converged=max_top <= TOP_POPULATION_THRESHOLD,
                          protocol=protocol, excited=excited,
                          max_top_population=max_top, trajectory=trajectory)


def run_zeno(params, psi, protocol, cfg=None, hilbert=None, adaptive=True,
             samples_per_interval=0):
    """
    Runs a Zeno protocol from |psi, 0_A>: evolve for tau, measure, repeat.

    With *adaptive* truncation the run is repeated with 50% more Fock levels
    whenever the two highest levels hold more than 1e-8 population at any
    checkpoint.

    :param params: ModelParams
    :param psi: initial QubitState
    :param protocol: ZenoProtocol
    :param cfg: IntegratorConfig
    :param hilbert: initial HilbertConfig (default n_max = 12)
    :param adaptive: grow the truncation until converged
    :param samples_per_interval: record a dense Trajectory with this many
                                 samples per Zeno interval if > 0
    :return: SurvivalSeries
    """
    if cfg is None:
        cfg = IntegratorConfig()
    if hilbert is None:
        hilbert = HilbertConfig()

    while True:
        try:
            return _run_once(params, psi, protocol, cfg, hilbert, adaptive,
                             samples_per_interval)
        except _TruncationExceeded as exc:
            if hilbert.n_max >= N_MAX_CEILING:
                raise TruncationError(
                    "Fock truncation did not converge below n_max=%d; top level "
                    "population reached %.3e" % (N_MAX_CEILING, exc.population),
                    details=[{"n_max": hilbert.n_max, "top_population": exc.population}])
            n_max = min(N_MAX_CEILING, int(math.ceil(1.5 * hilbert.n_max)))
            logger.info("top Fock population %.3e at n_max=%d, rerunning with n_max=%d",
                        exc.population, hilbert.n_max, n_max)
            hilbert = HilbertConfig(n_max)


def convergence_report(params, psi, protocol, cfg=None, hilbert=None):
    """
    Compares a run against one with half the integrator step and one with
    twice the Fock truncation.

    :return: dictionary with the maximal absolute changes of the survival
             probabilities and a 'passed' flag against cfg.convergence_tol.
    """
    if cfg is None:
        cfg = IntegratorConfig()
    base = run_zeno(params, psi, protocol, cfg, hilbert)
    fine = run_zeno(params, psi, protocol, cfg.refined(), HilbertConfig(base.n_max),
                    adaptive=False)
    wide = run_zeno(params, psi, protocol, cfg, HilbertConfig(2 * base.n_max),
                    adaptive=False)

    base_p = np.asarray(base.probs)
    step_delta = float(np.max(np.abs(np.asarray(fine.probs) - base_p)))
    truncation_delta = float(np.max(np.abs(np.asarray(wide.probs) - base_p)))
    tol = cfg.convergence_tol
    return {"n_max": base.n_max,
            "n_max_doubled": wide.n_max,
            "steps_per_interval": cfg.steps_for(protocol.tau, params),
            "steps_per_interval_refined": cfg.refined().steps_for(protocol.tau, params),
            "step_halving_delta": step_delta,
            "truncation_doubling_delta": truncation_delta,
            "tolerance": tol,
            "truncation_converged": bool(base.converged),
            "passed": bool(step_delta < tol and truncation_delta < tol and base.converged)}
