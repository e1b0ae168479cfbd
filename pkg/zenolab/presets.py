"""
The 'presets' module defines the parameter bundles of the six reference
figures and derives every data series of a figure from them.

Panel parameters are given in units of delta; all times are in 1/delta and
all rates in delta.
"""

import logging
import math

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from .analysis import default_tau_grid, rates_from_series, sweep_tau
from .analytic import (ContinuousLimitRate, kka_w_continuous, kka_w_finite_tau,
                       rate_equation_run, rw_alpha, rw_first_interval_general)
from .config import STATE_PRESETS, state_from_amplitudes
from .dynamics import (IntegratorConfig, MeasurementKind, ProjectionFrame, ZenoProtocol,
                       run_zeno)
from .errors import ConfigError
from .model import HilbertConfig, ModelParams, Variant
from .output import transitions_document

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Panel(object):
    label: str
    params: ModelParams
    state: str = "e"

    @property
    def psi(self):
        return state_from_amplitudes(STATE_PRESETS[self.state])


@dataclass(frozen=True)
class FigurePreset(object):
    """
    Parameter bundle of one figure. Only the fields a figure uses are set.
    """
    name: str
    description: str
    panels: Tuple[Panel, ...]
    taus: Tuple[float, ...] = ()
    n_meas: int = 0
    t_end: float = 0.0
    pre_evolution_time: float = 0.0
    samples_per_interval: int = 0
    n_list: Tuple[int, ...] = ()
    kka_taus: Tuple[float, ...] = ()


@dataclass
class FigureContext(object):
    """
    Numerical settings shared by all panels of a figure run.
    """
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    hilbert: HilbertConfig = field(default_factory=HilbertConfig)
    jobs: int = 1
    rate_reset: bool = True
    tau_grid: Optional[np.ndarray] = None
    progress: object = None


@dataclass
class FigureData(object):
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    documents: Dict[str, dict] = field(default_factory=dict)
    summary: Dict[str, object] = field(default_factory=dict)


def _grid(variant, g_values, gamma_values, state="e", labels="abcdef", g_outer=True):
    panels = []
    pairs = ([(g, gam) for g in g_values for gam in gamma_values] if g_outer
             else [(g, gam) for gam in gamma_values for g in g_values])
    for label, (g, gamma) in zip(labels, pairs):
        params = ModelParams(delta=1.0, omega0=1.0, g=g, gamma=gamma, variant=variant)
        panels.append(Panel(label=label, params=params, state=state))
    return tuple(panels)


PRESETS = {
    "fig1": FigurePreset(
        name="fig1",
        description="free decay of |e> under the rotating-wave coupling against "
                    "the closed-form amplitude",
        panels=_grid(Variant.JC, (0.06, 0.6), (0.03, 0.3)),
        taus=(0.1,), t_end=30.0),
    "fig2": FigurePreset(
        name="fig2",
        description="survival of 0.8|e> + 0.6|g> under repeated selective measurements "
                    "against the single-interval product law",
        panels=_grid(Variant.JC, (0.06, 0.6), (0.03, 0.3), state="0.8-0.6"),
        taus=(0.1,), n_meas=100),
    "fig3": FigurePreset(
        name="fig3",
        description="excited population during relaxation and non-selective "
                    "measurements, master equation against the rate equation",
        panels=(Panel("weak", ModelParams(1.0, 1.0, 0.05, 0.03, Variant.RABI), "g"),
                Panel("moderate", ModelParams(1.0, 1.0, 0.3, 0.03, Variant.RABI), "g")),
        taus=(math.pi / 2,), n_meas=16, pre_evolution_time=8 * math.pi,
        samples_per_interval=8),
    "fig4": FigurePreset(
        name="fig4",
        description="scaled decay rate per Zeno interval against the "
                    "continuous-limit rate",
        panels=_grid(Variant.RABI, (0.1, 0.8), (0.1, 0.3), state="3-4",
                     g_outer=False),
        taus=(1.0, 0.5, 0.1), t_end=20.0),
    "fig5": FigurePreset(
        name="fig5",
        description="continuous-limit and bath-reset decay rates for four "
                    "initial states",
        panels=tuple(Panel(label, ModelParams(1.0, 1.0, 0.5, 0.1, Variant.RABI), state)
                     for label, state in zip("abcd", ("3-4", "3-4-phase-pi8", "4-3", "e"))),
        taus=(1.0,), t_end=20.0, kka_taus=(1.0, 0.01)),
    "fig6": FigurePreset(
        name="fig6",
        description="total average decay rate against the Zeno interval with "
                    "QZE-QAZE transitions",
        panels=_grid(Variant.RABI, (0.2, 0.5, 0.9), (0.1, 0.3), g_outer=False),
        n_list=(1, 2, 4, 8, 16)),
}


def get_preset(name):
    """
    Returns the FigurePreset *name*.

    :raises ConfigError: for unknown names.
    """
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError("unknown figure preset '%s'" % name,
                          details=[{"line": None, "field": "figure",
                                    "message": "use one of %s" % ", ".join(sorted(PRESETS))}])


def _panel_columns(panel):
    return {"panel": panel.label, "g": panel.params.g, "gamma": panel.params.gamma}


def _frame(rows, columns):
    return pd.DataFrame(rows, columns=columns)


def build_fig1(preset, ctx):
    tau = preset.taus[0]
    n_meas = int(round(preset.t_end / tau))
    protocol = ZenoProtocol(tau=tau, n_meas=n_meas, measurement=MeasurementKind.NONE)
    data = FigureData()
    rows = []
    residuals = {}
    for panel in preset.panels:
        series = run_zeno(panel.params, panel.psi, protocol, ctx.integrator, ctx.hilbert)
        times = np.asarray(series.times)
        analytic = np.abs(rw_alpha(times, panel.params)) ** 2
        numeric = np.asarray(series.excited)
        residual = numeric - analytic
        residuals[panel.label] = float(np.max(np.abs(residual)))
        base = _panel_columns(panel)
        for t, p_num, p_ana, res in zip(times, numeric, analytic, residual):
            rows.append((base["panel"], base["g"], base["gamma"], t, p_num, p_ana, res))
    data.tables["fig1"] = _frame(rows, ["panel", "g", "gamma", "t", "P_numeric",
                                        "P_analytic", "residual"])
    data.summary["max_residual"] = residuals
    return data


def build_fig2(preset, ctx):
    tau = preset.taus[0]
    protocol = ZenoProtocol(tau=tau, n_meas=preset.n_meas,
                            projection_frame=ProjectionFrame.ROTATING)
    data = FigureData()
    rows = []
    deviations = {}
    for panel in preset.panels:
        psi = panel.psi
        series = run_zeno(panel.params, psi, protocol, ctx.integrator, ctx.hilbert)
        single = rw_first_interval_general(psi, tau, panel.params)
        approx = single ** np.arange(len(series.probs))
        deviation = np.asarray(series.probs) - approx
        deviations[panel.label] = float(np.max(np.abs(deviation)))
        for n, (t, p_exact, p_approx, dev) in enumerate(zip(series.times, series.probs,
                                                             approx, deviation)):
            rows.append((panel.label, panel.params.g, panel.params.gamma, n, t,
                         p_exact, p_approx, dev))
    data.tables["fig2"] = _frame(rows, ["panel", "g", "gamma", "n", "t", "P_exact",
                                        "P_approx", "deviation"])
    data.summary["max_deviation"] = deviations
    return data


def build_fig3(preset, ctx):
    tau = preset.taus[0]
    protocol = ZenoProtocol(tau=tau, n_meas=preset.n_meas,
                            measurement=MeasurementKind.NONSELECTIVE,
                            pre_evolution_time=preset.pre_evolution_time)
    data = FigureData()
    rows = []
    minima = {}
    for panel in preset.panels:
        series = run_zeno(panel.params, panel.psi, protocol, ctx.integrator, ctx.hilbert,
                          samples_per_interval=preset.samples_per_interval)
        traj = series.trajectory
        rate = rate_equation_run(panel.params, protocol, traj.times, reset=ctx.rate_reset)
        minima[panel.label] = {"master": float(min(traj.excited)),
                               "rate": float(min(rate.rho_ee))}
        for t, master, rate_ee in zip(traj.times, traj.excited, rate.rho_ee):
            rows.append((panel.label, panel.params.g, panel.params.gamma, t, master, rate_ee))
    data.tables["fig3"] = _frame(rows, ["panel", "g", "gamma", "t", "rho_ee_master",
                                        "rho_ee_rate"])
    data.summary["min_rho_ee"] = minima
    data.summary["rate_reset"] = ctx.rate_reset
    return data


def _w_numeric_rows(preset, panel, ctx, rows):
    for tau in preset.taus:
        n_meas = int(round(preset.t_end / tau))
        series = run_zeno(panel.params, panel.psi, ZenoProtocol(tau=tau, n_meas=n_meas),
                          ctx.integrator, ctx.hilbert)
        rates = rates_from_series(series)
        for n, w_n in enumerate(rates.scaled):
            rows.append((panel.label, panel.params.g, panel.params.gamma, panel.state,
                         tau, n, n * tau, w_n))


def _w_analytic_rows(preset, panel, rows, points=401):
    rate = ContinuousLimitRate(panel.params, panel.psi)
    times = np.linspace(0.0, preset.t_end, points)
    for t, w in zip(times, rate.w(times)):
        rows.append((panel.label, panel.params.g, panel.params.gamma, panel.state, t, w))


def build_fig4(preset, ctx):
    data = FigureData()
    numeric, analytic = [], []
    for panel in preset.panels:
        _w_numeric_rows(preset, panel, ctx, numeric)
        _w_analytic_rows(preset, panel, analytic)
    data.tables["fig4_numeric"] = _frame(numeric, ["panel", "g", "gamma", "state", "tau",
                                                   "n", "t", "w_n"])
    data.tables["fig4_analytic"] = _frame(analytic, ["panel", "g", "gamma", "state", "t",
                                                     "w"])
    return data


def build_fig5(preset, ctx):
    data = FigureData()
    numeric, analytic, kka = [], [], []
    for panel in preset.panels:
        _w_numeric_rows(preset, panel, ctx, numeric)
        _w_analytic_rows(preset, panel, analytic)
        for tau in preset.kka_taus:
            w_kka = kka_w_finite_tau(panel.psi, tau, panel.params, ctx.integrator, ctx.hilbert)
            kka.append((panel.label, panel.state, "heff", tau, w_kka))
        kka.append((panel.label, panel.state, "continuous", 0.0,
                    kka_w_continuous(panel.psi, panel.params)))
    data.tables["fig5_numeric"] = _frame(numeric, ["panel", "g", "gamma", "state", "tau",
                                                   "n", "t", "w_n"])
    data.tables["fig5_analytic"] = _frame(analytic, ["panel", "g", "gamma", "state", "t",
                                                     "w"])
    data.tables["fig5_kka"] = _frame(kka, ["panel", "state", "method", "tau", "w_kka"])
    return data


def build_fig6(preset, ctx):
    data = FigureData()
    tau_grid = ctx.tau_grid if ctx.tau_grid is not None else default_tau_grid()
    rows = []
    transitions = {}
    errors = {}
    for panel in preset.panels:
        logger.info("fig6 panel %s: g=%g gamma=%g", panel.label, panel.params.g,
                    panel.params.gamma)
        sweep = sweep_tau(panel.params, panel.psi, preset.n_list, tau_grid,
                          ctx.integrator, ctx.hilbert, jobs=ctx.jobs, progress=ctx.progress)
        for i, n_meas in enumerate(sweep.n_list):
            for j, tau in enumerate(sweep.taus):
                rows.append((panel.label, panel.params.g, panel.params.gamma, float(tau),
                             n_meas, float(sweep.Lambda[i, j])))
        transitions[panel.label] = transitions_document(sweep)
        if sweep.errors:
            errors[panel.label] = len(sweep.errors)
    data.tables["fig6_sweep"] = _frame(rows, ["panel", "g", "gamma", "tau", "N", "Lambda"])
    data.documents["fig6_transitions"] = transitions
    data.summary["failed_cells"] = errors
    return data


_BUILDERS = {
    "fig1": build_fig1,
    "fig2": build_fig2,
    "fig3": build_fig3,
    "fig4": build_fig4,
    "fig5": build_fig5,
    "fig6": build_fig6,
}


def build_figure(name, ctx=None):
    """
    Regenerates all series of figure *name*.

    :param name: one of fig1 .. fig6
    :param ctx: FigureContext with the numerical settings
    :return: FigureData
    """
    preset = get_preset(name)
    if ctx is None:
        ctx = FigureContext()
    logger.info("building %s: %s", preset.name, preset.description)
    data = _BUILDERS[name](preset, ctx)
    data.summary["panels"] = {panel.label: dict(panel.params.as_dict(),
                                                variant=panel.params.variant.value,
                                                state=panel.state)
                              for panel in preset.panels}
    return data
