"""
The 'analytic' module provides closed-form and semi-analytic reference
quantities the master equation results are checked against:

* the rotating-wave amplitude of the excited state and the survival
  probabilities derived from it,
* the continuous-limit scaled decay rate w(t) and survival,
* survival and decay rates when the bath is reset after every measurement
  (KKA: Kofman-Kurizki approach),
* the population rate equation with the time dependent rates R_e, R_g.
"""

import logging

from dataclasses import dataclass
from typing import List

import numpy as np

from scipy import integrate

from .dynamics import (IntegratorConfig, MeasurementKind, SurvivalSeries,
                       evolve_amplitudes)
from .errors import EngineError
from .model import HilbertConfig, build_operators, product_vector, qubit_expectations

logger = logging.getLogger(__name__)

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


class RWAnalytic(object):
    """
    Exact excited state amplitude of the rotating-wave model in the
    single-excitation sector,

        alpha(t) = 1/2 exp((i delta - i omega0 - gamma) t / 2) (A+ e^{Dt} + A- e^{-Dt})

    with D = sqrt((gamma - i delta + i omega0)^2 / 4 - g^2) on the principal
    branch and A+- = 1 +- (gamma - i delta + i omega0) / 2D.
    The amplitude is taken in the frame co-rotating with the qubit.
    """
    def __init__(self, params):
        self.params = params
        self.c = params.gamma - 1j * params.delta + 1j * params.omega0
        self.d = np.sqrt(0.25 * self.c ** 2 - params.g ** 2 + 0j)
        if self.d != 0:
            self.a_plus = 1.0 + self.c / (2.0 * self.d)
            self.a_minus = 1.0 - self.c / (2.0 * self.d)
        else:
            self.a_plus = self.a_minus = None

    def _envelope(self, t):
        p = self.params
        return np.exp((1j * p.delta - 1j * p.omega0 - p.gamma) * t / 2.0)

    def alpha(self, t, branch=1):
        """
        Evaluates alpha(t). *branch* = -1 uses -D, which swaps A+ and A-
        and gives the same value.
        """
        t = np.asarray(t, dtype=float)
        if self.d == 0:
            # double root: cosh(Dt) + c/(2D) sinh(Dt) -> 1 + c t / 2
            return self._envelope(t) * (1.0 + 0.5 * self.c * t)
        d = branch * self.d
        a_plus = 1.0 + self.c / (2.0 * d)
        a_minus = 1.0 - self.c / (2.0 * d)
        return 0.5 * self._envelope(t) * (a_plus * np.exp(d * t) + a_minus * np.exp(-d * t))


def rw_alpha(t, params):
    """
    Rotating-wave excited state amplitude alpha(t) with alpha(0) = 1.
    """
    return RWAnalytic(params).alpha(t)


def rw_survival_excited(tau, n, params):
    """
    Survival of |e> after n selective measurements: |alpha(tau)|^(2n).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    return float(abs(rw_alpha(tau, params)) ** (2 * n))


def rw_first_interval_general(psi, tau, params):
    """
    Exact survival after the first measurement for |psi> = a|e> + b|g>
    under the rotating-wave coupling,

        P(tau) = |a* a(tau) + |b|^2|^2 + |b|^2 (|a|^2 - |a(tau)|^2),

    with a(tau) = a alpha(tau). Both amplitudes live in the frame co-rotating
    with the qubit, so the engine reproduces this value with selective
    measurements in ProjectionFrame.ROTATING.
    """
    amp = psi.alpha * rw_alpha(tau, params)
    b2 = abs(psi.beta) ** 2
    overlap = psi.alpha.conjugate() * amp + b2
    return float(abs(overlap) ** 2 + b2 * (abs(psi.alpha) ** 2 - abs(amp) ** 2))


class ContinuousLimitRate(object):
    """
    Scaled decay rate w(t) in the limit of continuous measurement,

        w(t) = Var(H_eta(t)) + g^2 (1 - <sx>^2),
        H_eta(t) = (delta/2) sz + g sx [eta(t) + eta*(t)],
        eta(t) = g <sx> [exp(-(gamma + i omega0) t) - 1] / (omega0 - i gamma),

    with all expectations taken in the measured qubit state *psi*.
    """
    def __init__(self, params, psi):
        self.params = params
        self.psi = psi
        self.sx, self.sz = qubit_expectations(psi)

    def eta(self, t):
        p = self.params
        t = np.asarray(t, dtype=float)
        return (p.g * self.sx * (np.exp(-(p.gamma + 1j * p.omega0) * t) - 1.0)
                / (p.omega0 - 1j * p.gamma))

    def eta_infinity(self):
        p = self.params
        return -p.g * self.sx / (p.omega0 - 1j * p.gamma)

    def _w_from_eta(self, eta):
        p = self.params
        x = np.atleast_1d(2.0 * np.real(eta))
        ham = 0.5 * p.delta * _SZ[None, :, :] + p.g * x[:, None, None] * _SX[None, :, :]
        vec = self.psi.vector
        mean = np.einsum("i,tij,j->t", vec.conj(), ham, vec).real
        square = np.einsum("i,tij,tjk,k->t", vec.conj(), ham, ham, vec).real
        return square - mean ** 2 + p.g ** 2 * (1.0 - self.sx ** 2)

    def w(self, t):
        values = self._w_from_eta(self.eta(t))
        return values if np.ndim(t) else float(values[0])

    def w_infinity(self):
        return float(self._w_from_eta(self.eta_infinity())[0])

    def integral(self, t0, t1):
        """
        Integral of w over [t0, t1] by adaptive quadrature.
        """
        if t1 <= t0:
            return 0.0
        value, _ = integrate.quad(self.w, t0, t1, epsabs=1e-12, epsrel=1e-10, limit=500)
        return value

    def interval_average(self, tau, n):
        """
        Average of w over the n-th Zeno interval [n tau, (n + 1) tau].
        """
        return self.integral(n * tau, (n + 1) * tau) / tau


def continuous_w(t, psi, params):
    """
    Continuous-limit scaled decay rate w(t).
    """
    return ContinuousLimitRate(params, psi).w(t)


def continuous_survival(t, tau, psi, params):
    """
    P(t) = exp(-tau * integral_0^t w(t') dt').
    """
    return float(np.exp(-tau * ContinuousLimitRate(params, psi).integral(0.0, t)))


def kka_w_continuous(psi, params):
    """
    Continuous-limit decay rate with the bath reset after each
    measurement: (delta/2)^2 (1 - <sz>^2) + g^2.
    """
    _, sz = qubit_expectations(psi)
    return 0.25 * params.delta ** 2 * (1.0 - sz ** 2) + params.g ** 2


def kka_survival_finite_tau(psi, tau, params, cfg=None, hilbert=None):
    """
    P_KKA(tau) = |<psi 0_A| exp(-i H_eff tau) |psi 0_A>|^2 with
    H_eff = H - i gamma a^dag a, integrated with the RK4 engine.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    if cfg is None:
        cfg = IntegratorConfig()
    if hilbert is None:
        hilbert = HilbertConfig()
    ops = build_operators(params, hilbert)
    start = product_vector(psi, hilbert)
    final = evolve_amplitudes(start, tau, ops, cfg)
    return float(abs(np.vdot(start, final)) ** 2)


def kka_w_finite_tau(psi, tau, params, cfg=None, hilbert=None):
    """
    w_KKA(tau) = -ln P_KKA(tau) / tau^2.
    """
    return -np.log(kka_survival_finite_tau(psi, tau, params, cfg, hilbert)) / tau ** 2


def kka_series(psi, tau, n, params, cfg=None, hilbert=None):
    """
    SurvivalSeries of the bath-reset approximation, P(k tau) = P_KKA(tau)^k.
    """
    if hilbert is None:
        hilbert = HilbertConfig()
    single = kka_survival_finite_tau(psi, tau, params, cfg, hilbert)
    probs = [single ** k for k in range(n + 1)]
    return SurvivalSeries(tau=tau, times=[k * tau for k in range(n + 1)], probs=probs,
                          params=params, n_max=hilbert.n_max, converged=True)


@dataclass
class RatePopulations(object):
    times: List[float]
    rho_ee: List[float]
    rho_gg: List[float]


class RateEquationModel(object):
    """
    Population rate equation

        d rho_ee / dt = -R_e rho_ee + R_g rho_gg,  rho_gg = 1 - rho_ee

    with R_e,g(t) = 2 int G0(w) sin((w -+ delta) t) / (w -+ delta) dw and the
    Lorentzian G0(w) = g^2 / pi * gamma / ((w - omega0)^2 + gamma^2).

    With *reset* the rate clock restarts at every non-selective measurement,
    otherwise it runs from t = 0.
    """
    def __init__(self, params, reset=True):
        self.params = params
        self.reset = reset

    def spectral_density(self, omega):
        p = self.params
        return p.g ** 2 / np.pi * p.gamma / ((omega - p.omega0) ** 2 + p.gamma ** 2)

    def _rate(self, t, detuning):
        # R(t) = 2 int_0^t ds g^2 exp(-gamma s) cos(detuning s)
        p = self.params
        t = np.asarray(t, dtype=float)
        z = p.gamma - 1j * detuning
        if z == 0:
            return 2.0 * p.g ** 2 * t
        return 2.0 * p.g ** 2 * np.real((1.0 - np.exp(-z * t)) / z)

    def rates(self, t):
        """
        Returns (R_e(t), R_g(t)) in closed form.
        """
        p = self.params
        return self._rate(t, p.omega0 - p.delta), self._rate(t, p.omega0 + p.delta)

    def rates_quadrature(self, t):
        """
        Returns (R_e(t), R_g(t)) by direct quadrature over frequency.
        """
        p = self.params
        return (self._quadrature(t, p.delta), self._quadrature(t, -p.delta))

    def _quadrature(self, t, shift):
        # 2 int G0(w) sin((w - shift) t) / (w - shift) dw, folded onto u = |w - shift|
        if t == 0:
            return 0.0
        p = self.params
        fold = lambda u: self.spectral_density(shift + u) + self.spectral_density(shift - u)
        peak = abs(p.omega0 - shift)
        cut = peak + 50.0 * max(p.gamma, 1e-3) + 10.0
        points = [peak] if peak > 0 else None
        near, _ = integrate.quad(lambda u: fold(u) * t * np.sinc(u * t / np.pi), 0.0, cut,
                                 points=points, epsabs=1e-13, epsrel=1e-12, limit=2000)
        tail, _ = integrate.quad(lambda u: fold(u) / u, cut, np.inf, weight="sin", wvar=t,
                                 epsabs=1e-13, limlst=200)
        return 2.0 * (near + tail)

    def run(self, protocol, t_grid, initial_excited=0.0):
        """
        Integrates the rate equation over *t_grid* for a protocol of free
        relaxation during protocol.pre_evolution_time followed by
        protocol.n_meas non-selective measurements every protocol.tau.
        Under this model a measurement leaves the populations unchanged.

        :return: RatePopulations sampled on t_grid
        """
        t_grid = np.asarray(t_grid, dtype=float)
        if np.any(np.diff(t_grid) < 0):
            raise ValueError("t_grid must be ascending")
        if protocol.measurement is MeasurementKind.SELECTIVE:
            raise ValueError("the rate equation only supports non-selective protocols")

        stops = [protocol.pre_evolution_time + k * protocol.tau
                 for k in range(1, protocol.n_meas + 1)]
        if protocol.measurement is MeasurementKind.NONE:
            stops = []
        end = float(t_grid[-1]) if len(t_grid) else 0.0
        edges = [0.0] + [s for s in stops if s < end] + [end]

        values = np.empty_like(t_grid)
        rho = float(initial_excited)
        for start, stop in zip(edges[:-1], edges[1:]):
            clock0 = start if self.reset else 0.0

            def rhs(t, y, clock0=clock0):
                r_e, r_g = self.rates(t - clock0)
                return [-r_e * y[0] + r_g * (1.0 - y[0])]

            inside = (t_grid >= start) & (t_grid <= stop)
            if stop <= start:
                values[inside] = rho
                continue
            t_eval = np.union1d(t_grid[inside], [stop])
            sol = integrate.solve_ivp(rhs, (start, stop), [rho], method="DOP853",
                                      t_eval=t_eval, rtol=1e-10, atol=1e-12)
            if not sol.success:
                raise EngineError("rate equation integration failed: %s" % sol.message)
            values[inside] = np.interp(t_grid[inside], sol.t, sol.y[0])
            rho = float(sol.y[0][-1])

        return RatePopulations(times=list(t_grid), rho_ee=list(values),
                               rho_gg=list(1.0 - values))


def relaxation_rates(t, params):
    """
    Closed-form (R_e(t), R_g(t)).
    """
    return RateEquationModel(params).rates(t)


def relaxation_rates_quadrature(t, params):
    """
    (R_e(t), R_g(t)) by direct frequency-space quadrature.
    """
    return RateEquationModel(params).rates_quadrature(t)


def rate_equation_run(params, protocol, t_grid, reset=True, initial_excited=0.0):
    """
    Populations of the rate equation model, see RateEquationModel.run.
    """
    return RateEquationModel(params, reset=reset).run(protocol, t_grid, initial_excited)
