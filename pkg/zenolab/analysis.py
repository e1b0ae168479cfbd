"""
The 'analysis' module turns survival series into decay rates and locates the
transitions between Zeno (dLambda/dtau > 0) and anti-Zeno (dLambda/dtau < 0)
behaviour over sweeps of the Zeno interval tau.
"""

import logging
import math

from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from scipy import interpolate, optimize

from .analytic import kka_series
from .dynamics import IntegratorConfig, ZenoProtocol, run_zeno
from .errors import AnalysisError, ZenoLabError
from .event import CellProgress, Event

logger = logging.getLogger(__name__)

QZE = "QZE"
QAZE = "QAZE"
IDENTITY_TOL = 1e-10
FLATNESS_TOL = 1e-6
REFINE_XTOL = 1e-3


@dataclass
class RateSeries(object):
    """
    lambda_n = ln(P(n tau) / P((n+1) tau)) / tau and w_n = lambda_n / tau.
    *infinite_at* is the index of the first interval after which the survival
    vanished; the series stops there.
    """
    tau: float
    lambdas: List[float]
    scaled: List[float]
    infinite_at: Optional[int] = None


def rates_from_series(series):
    """
    Computes the per-interval decay rates of a SurvivalSeries.
    """
    probs = series.probs
    tau = series.tau
    if probs and probs[0] <= 0:
        raise AnalysisError("survival series starts at P(0)=%g" % probs[0])

    lambdas = []
    infinite_at = None
    for n in range(len(probs) - 1):
        if probs[n + 1] <= 0:
            lambdas.append(math.inf)
            infinite_at = n
            logger.warning("survival vanished after interval %d, rate series truncated", n)
            break
        lambdas.append(math.log(probs[n] / probs[n + 1]) / tau)

    negative = [lam for lam in lambdas if lam < -1e-9]
    if negative:
        logger.warning("%d negative decay rates (min %.3e): survival not monotone",
                       len(negative), min(negative))

    return RateSeries(tau=tau, lambdas=lambdas, scaled=[lam / tau for lam in lambdas],
                      infinite_at=infinite_at)


def total_average_rate(series, n_meas=None):
    """
    Lambda_N(tau) = -ln P(N tau) / (N tau), checked against the mean of the
    per-interval rates.

    :param series: SurvivalSeries
    :param n_meas: N, defaults to the length of the series
    """
    if n_meas is None:
        n_meas = series.n_meas
    if n_meas < 1:
        raise AnalysisError("at least one measurement is required")
    final = series.probs[n_meas]
    if final <= 0:
        raise AnalysisError("zero survival after %d measurements" % n_meas)

    tau = series.tau
    direct = -math.log(final) / (n_meas * tau)
    rates = rates_from_series(series.truncated(n_meas))
    mean = math.fsum(rates.lambdas) / n_meas
    if abs(direct - mean) > IDENTITY_TOL * max(1.0, abs(direct)):
        raise AnalysisError("Lambda_N identity violated: %.17g != %.17g" % (direct, mean))
    return direct


@dataclass
class Transition(object):
    tau_c: float
    direction: str

    def to_dict(self):
        return {"tau_c": self.tau_c, "direction": self.direction}


@dataclass
class TransitionResult(object):
    """
    Transition times of one Lambda_N row and the QZE / QAZE segments
    between them. *smooth* is False when the derivative sign flips on
    adjacent grid intervals, i.e. the grid does not resolve the row.
    """
    n_meas: int
    transitions: List[Transition] = field(default_factory=list)
    segments: List[tuple] = field(default_factory=list)
    flat: bool = False
    smooth: bool = True

    @property
    def times(self):
        return [tr.tau_c for tr in self.transitions]

    def to_dict(self):
        return {"N": self.n_meas,
                "flat": self.flat,
                "smooth": self.smooth,
                "transitions": [tr.to_dict() for tr in self.transitions],
                "segments": [{"start": s, "end": e, "label": lab}
                             for (s, e, lab) in self.segments]}


@dataclass
class SweepResult(object):
    """
    Lambda[i, j] = Lambda_{n_list[i]}(taus[j]). Failed cells hold NaN and
    their message in *errors* keyed by the tau index.
    """
    taus: np.ndarray
    n_list: List[int]
    Lambda: np.ndarray
    delta: float = 1.0
    errors: Dict[int, str] = field(default_factory=dict)
    n_max_used: Dict[int, int] = field(default_factory=dict)
    converged: Dict[int, bool] = field(default_factory=dict)
    transitions: Dict[int, TransitionResult] = field(default_factory=dict)

    def row(self, n_meas):
        return self.Lambda[self.n_list.index(n_meas)]


def default_tau_grid(tau_min=0.05, tau_max=6.0, points=60, spacing="log"):
    """
    Ascending tau grid, log-spaced by default.
    """
    if not 0 < tau_min < tau_max:
        raise ValueError("need 0 < tau_min < tau_max")
    if spacing == "log":
        return np.geomspace(tau_min, tau_max, points)
    if spacing == "linear":
        return np.linspace(tau_min, tau_max, points)
    raise ValueError("unknown tau spacing %r" % spacing)


def _sweep_cell(index, tau, params, psi, n_list, cfg, hilbert, survival_model):
    """
    Runs the longest protocol of one tau and reads Lambda_N for every N
    from its nested checkpoints.
    """
    n_top = max(n_list)
    try:
        if survival_model == "kka":
            series = kka_series(psi, tau, n_top, params, cfg, hilbert)
        else:
            series = run_zeno(params, psi, ZenoProtocol(tau=tau, n_meas=n_top), cfg, hilbert)
    except ZenoLabError as exc:
        return index, [math.nan] * len(n_list), "%s: %s" % (type(exc).__name__, exc), None, False

    row = []
    error = None
    for n_meas in n_list:
        final = series.probs[n_meas]
        if final > 0:
            row.append(-math.log(final) / (n_meas * tau))
        else:
            row.append(math.nan)
            error = "zero survival for N=%d" % n_meas
    return index, row, error, series.n_max, series.converged


def sweep_tau(params, psi, n_list, tau_grid, cfg=None, hilbert=None, jobs=1,
              survival_model="master", progress=None):
    """
    Fills Lambda_N(tau) over *tau_grid* for all N in *n_list* and detects the
    transition times of every row.

    :param jobs: number of worker processes; cells are independent.
    :param survival_model: 'master' for the master equation, 'kka' for the
                           bath-reset survival P_KKA(tau)^N.
    :param progress: optional Event fired with a CellProgress per finished cell.
    :return: SweepResult
    """
    taus = np.asarray(tau_grid, dtype=float)
    if np.any(np.diff(taus) <= 0):
        raise ValueError("tau_grid must be strictly ascending")
    n_list = sorted(int(n) for n in n_list)
    if not n_list or n_list[0] < 1:
        raise ValueError("n_list must contain positive measurement counts")
    if survival_model not in ("master", "kka"):
        raise ValueError("unknown survival model %r" % survival_model)
    if cfg is None:
        cfg = IntegratorConfig()
    if progress is None:
        progress = Event("cell")

    total = len(taus)
    results = []
    args = [(i, float(tau), params, psi, n_list, cfg, hilbert, survival_model)
            for i, tau in enumerate(taus)]

    def collect(result):
        results.append(result)
        progress(CellProgress(result[0], total, taus[result[0]], result[2]))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_sweep_cell, *arg) for arg in args]
            for future in as_completed(futures):
                collect(future.result())
    else:
        for arg in args:
            collect(_sweep_cell(*arg))

    results.sort(key=lambda res: res[0])
    sweep = SweepResult(taus=taus, n_list=n_list,
                        Lambda=np.full((len(n_list), total), math.nan), delta=params.delta)
    for index, row, error, n_max, converged in results:
        sweep.Lambda[:, index] = row
        if error is not None:
            sweep.errors[index] = error
            logger.warning("sweep cell tau=%g: %s", taus[index], error)
        if n_max is not None:
            sweep.n_max_used[index] = n_max
        sweep.converged[index] = converged

    transition_times(sweep)
    return sweep


def _fill_signs(signs):
    # zero derivatives continue the previous sign
    filled = signs.copy()
    nonzero = np.flatnonzero(filled)
    if not len(nonzero):
        return filled
    filled[:nonzero[0]] = filled[nonzero[0]]
    for i in range(1, len(filled)):
        if filled[i] == 0:
            filled[i] = filled[i - 1]
    return filled


def _label(sign):
    return QZE if sign > 0 else QAZE


def row_transitions(taus, values, n_meas=0, flat_tol=FLATNESS_TOL, delta=1.0):
    """
    Transition analysis of one Lambda_N(tau) row.

    The sign of dLambda/dtau is taken from central finite differences on the
    grid; each sign change is refined by bisection on the derivative of a
    cubic interpolant of the row. The row is flat when
    |dLambda/dtau| < flat_tol * delta^2 on the whole grid.
    """
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    finite = np.isfinite(values)
    taus, values = taus[finite], values[finite]
    result = TransitionResult(n_meas=n_meas)
    if len(taus) < 4:
        return result

    deriv = np.gradient(values, taus)
    if np.all(np.abs(deriv) < flat_tol * delta ** 2):
        result.flat = True
        return result

    signs = _fill_signs(np.sign(deriv))
    flips = np.flatnonzero(signs[1:] != signs[:-1])
    adjacent = flips[:-1][np.diff(flips) == 1]
    if len(adjacent):
        result.smooth = False
        logger.warning("Lambda_%d changes slope direction on adjacent grid intervals "
                       "near tau=%g; the tau grid does not resolve the row",
                       n_meas, taus[adjacent[0] + 1])
    slope = interpolate.CubicSpline(taus, values).derivative()

    start = taus[0]
    for i in range(len(taus) - 1):
        if signs[i] == signs[i + 1]:
            continue
        lo, hi = taus[i], taus[i + 1]
        if slope(lo) * slope(hi) < 0:
            tau_c = optimize.bisect(slope, lo, hi, xtol=REFINE_XTOL)
        else:
            # interpolant disagrees with the grid derivative, use the secant root
            tau_c = lo - deriv[i] * (hi - lo) / (deriv[i + 1] - deriv[i])
        tau_c = float(tau_c)
        direction = "%s->%s" % (_label(signs[i]), _label(signs[i + 1]))
        result.transitions.append(Transition(tau_c=tau_c, direction=direction))
        result.segments.append((float(start), tau_c, _label(signs[i])))
        start = tau_c
    result.segments.append((float(start), float(taus[-1]), _label(signs[-1])))
    return result


def transition_times(sweep, flat_tol=FLATNESS_TOL):
    """
    Locates tau_N^c for every row of *sweep* and stores the results in
    sweep.transitions.

    :return: dictionary N -> list of tau_N^c
    """
    for n_meas in sweep.n_list:
        sweep.transitions[n_meas] = row_transitions(sweep.taus, sweep.row(n_meas),
                                                    n_meas, flat_tol, sweep.delta)
    return {n_meas: res.times for n_meas, res in sweep.transitions.items()}
