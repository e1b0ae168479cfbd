"""
Collection of Command classes, one per command line subcommand, to be
run by the CommandManager. A command computes its result tables in
*_execute* and writes them in *on_action*.
"""

import logging

from dataclasses import replace

import numpy as np
import pandas as pd

from .analysis import rates_from_series, sweep_tau, total_average_rate
from .analytic import rate_equation_run, rw_first_interval_general
from .command_manager import CommandManager
from .dynamics import MeasurementKind, ProjectionFrame, convergence_report, run_zeno
from .errors import ConfigError, ConvergenceError
from .event import Event
from .output import OutputWriter, survival_table, sweep_table, transitions_document
from .presets import FigureContext, build_figure

logger = logging.getLogger(__name__)


def log_progress(cell):
    """
    Progress handler attached to sweep events.
    """
    if cell.failed:
        logger.warning("cell %d/%d (tau=%g) failed: %s", cell.index + 1, cell.total,
                       cell.tau, cell.error)
    else:
        logger.info("cell %d/%d (tau=%g) done", cell.index + 1, cell.total, cell.tau)


class Command(object):
    """
    Command is the base class of all subcommands.

    Supported kwargs: *config* ExperimentConfig, *writer* OutputWriter,
                      *jobs* number of worker processes.
    """
    name = None
    _required = ['config']

    def __init__(self, *args, **kwargs):
        for req in self._required:
            if req not in kwargs:
                raise TypeError("Missing positional argument %s" % req)

        self.args = args
        self.config = None
        self.writer = None
        self.jobs = 1
        self.tables = {}
        self.documents = {}
        self.summary = {}
        for key, val in kwargs.items():
            setattr(self, key, val)

        if self.writer is None:
            self.writer = OutputWriter(self.config.out_dir, self.config.format)

    def __call__(self):
        self._execute()
        self.on_action()

    def _execute(self):
        pass

    def on_action(self):
        """
        Writes all result tables and documents followed by the manifest.
        """
        for name, frame in self.tables.items():
            self.writer.table(name, frame)
        for name, doc in self.documents.items():
            self.writer.document(name, doc)
        self.writer.manifest(self.config, self.name, self.summary)

    @property
    def files(self):
        return list(self.writer.written)

    def _model(self):
        conf = self.config
        return (conf.to_params(), conf.to_state(), conf.to_protocol(),
                conf.to_integrator(), conf.to_hilbert())

    def _progress(self):
        progress = Event("cell")
        progress += log_progress
        return progress

    def __repr__(self):
        return "<%s %s>" % (self.__class__.__name__, ', '.join(
            ["%s=%s" % (k, v) for k, v in sorted(self.summary.items())]))


class Simulate(Command):
    """
    Simulate(config=)

    Runs one Zeno protocol and writes the survival series with its decay rates.
    """
    name = "simulate"

    def _execute(self):
        params, psi, protocol, cfg, hilbert = self._model()
        series = run_zeno(params, psi, protocol, cfg, hilbert, adaptive=self.config.adaptive,
                          samples_per_interval=self.config.samples_per_interval)
        rates = rates_from_series(series)
        self.series = series
        self.rates = rates

        self.tables["survival"] = survival_table(series, rates)
        if series.trajectory is not None:
            traj = series.trajectory
            self.tables["trajectory"] = pd.DataFrame({"t": traj.times,
                                                      "rho_ee": traj.excited,
                                                      "trace": traj.trace})

        self.summary.update({"n_max": series.n_max,
                             "converged": series.converged,
                             "max_top_population": series.max_top_population})
        if series.n_meas and series.probs[-1] > 0:
            self.summary["Lambda_N"] = total_average_rate(series)
        if rates.infinite_at is not None:
            self.summary["zero_survival_after"] = rates.infinite_at


class SweepTau(Command):
    """
    SweepTau(config=, jobs=)

    Sweeps the Zeno interval for all N of the configuration and writes the
    Lambda_N(tau) table and the transition times.
    """
    name = "sweep-tau"

    def _execute(self):
        params, psi, _, cfg, hilbert = self._model()
        conf = self.config
        sweep = sweep_tau(params, psi, conf.n_list, conf.tau_grid(), cfg, hilbert,
                          jobs=self.jobs, survival_model=conf.survival_model,
                          progress=self._progress())
        self.sweep = sweep
        self.tables["sweep"] = sweep_table(sweep)
        self.documents["transitions"] = transitions_document(sweep)
        self.summary.update({"survival_model": conf.survival_model,
                             "failed_cells": len(sweep.errors),
                             "n_max_used": max(sweep.n_max_used.values(), default=conf.n_max),
                             "converged": all(sweep.converged.values())})


class Figure(Command):
    """
    Figure(config=, figure=, jobs=)

    Regenerates all data series of the figure preset *figure*.
    """
    name = "figure"
    _required = ['config', 'figure']

    def _execute(self):
        conf = self.config
        ctx = FigureContext(integrator=conf.to_integrator(), hilbert=conf.to_hilbert(),
                            jobs=self.jobs, rate_reset=conf.rate_reset,
                            tau_grid=conf.tau_grid(), progress=self._progress())
        data = build_figure(self.figure, ctx)
        self.tables.update(data.tables)
        self.documents.update(data.documents)
        self.summary.update(data.summary)
        self.summary["figure"] = self.figure


class CompareRW(Command):
    """
    CompareRW(config=)

    Compares the master equation survival under selective measurements with
    the rotating-wave product law P(n tau) = P_RW(tau)^n. The projections are
    made in the frame co-rotating with the qubit, where the rotating-wave
    amplitude is defined.
    """
    name = "compare-rw"

    def _execute(self):
        params, psi, protocol, cfg, hilbert = self._model()
        if protocol.measurement is not MeasurementKind.SELECTIVE:
            raise ConfigError("compare-rw needs selective measurements",
                              details=[{"line": None, "field": "measurement",
                                        "message": "expected 'selective'"}])
        if protocol.target is not None:
            raise ConfigError("compare-rw projects on the initial state",
                              details=[{"line": None, "field": "target",
                                        "message": "must not be set"}])
        if params.variant.value != "jc":
            logger.warning("compare-rw with the %s coupling measures the deviation from "
                           "the rotating-wave result", params.variant.value)
        protocol = replace(protocol, projection_frame=ProjectionFrame.ROTATING)

        series = run_zeno(params, psi, protocol, cfg, hilbert, adaptive=self.config.adaptive)
        single = rw_first_interval_general(psi, protocol.tau, params)
        approx = single ** np.arange(len(series.probs))
        residual = np.asarray(series.probs) - approx

        self.tables["compare_rw"] = pd.DataFrame({"n": range(len(series.probs)),
                                                  "t": series.times,
                                                  "P_master": series.probs,
                                                  "P_rw": approx,
                                                  "residual": residual})
        self.summary.update({"n_max": series.n_max,
                             "converged": series.converged,
                             "max_residual": float(np.max(np.abs(residual))),
                             "first_interval_residual": float(abs(residual[1]))
                             if len(residual) > 1 else 0.0})


class CompareRate(Command):
    """
    CompareRate(config=)

    Compares the excited population of the master equation with the
    population rate equation under non-selective measurements.
    """
    name = "compare-rate"

    def _execute(self):
        params, psi, protocol, cfg, hilbert = self._model()
        if protocol.measurement is MeasurementKind.SELECTIVE:
            raise ConfigError("compare-rate needs non-selective measurements",
                              details=[{"line": None, "field": "measurement",
                                        "message": "expected 'nonselective' or 'none'"}])
        samples = self.config.samples_per_interval or 8
        series = run_zeno(params, psi, protocol, cfg, hilbert, adaptive=self.config.adaptive,
                          samples_per_interval=samples)
        traj = series.trajectory
        initial = float(abs(psi.alpha) ** 2)
        rate = rate_equation_run(params, protocol, traj.times, reset=self.config.rate_reset,
                                 initial_excited=initial)
        master = np.asarray(traj.excited)
        rate_ee = np.asarray(rate.rho_ee)

        self.tables["compare_rate"] = pd.DataFrame({"t": traj.times,
                                                    "rho_ee_master": master,
                                                    "rho_ee_rate": rate_ee,
                                                    "difference": master - rate_ee})
        self.summary.update({"n_max": series.n_max,
                             "converged": series.converged,
                             "rate_reset": self.config.rate_reset,
                             "max_difference": float(np.max(np.abs(master - rate_ee))),
                             "min_rho_ee_master": float(master.min()),
                             "min_rho_ee_rate": float(rate_ee.min())})


class CheckConvergence(Command):
    """
    CheckConvergence(config=)

    Reruns the configured protocol with half the integrator step and with
    twice the Fock truncation. The report is written in any case; a failed
    check ends the command with a ConvergenceError.
    """
    name = "check-convergence"

    def _execute(self):
        params, psi, protocol, cfg, hilbert = self._model()
        self.report = convergence_report(params, psi, protocol, cfg, hilbert)
        self.documents["convergence"] = self.report
        self.summary.update(self.report)

    def on_action(self):
        super(CheckConvergence, self).on_action()
        if not self.report["passed"]:
            raise ConvergenceError(
                "convergence check failed: step halving changed P by %.3e, truncation "
                "doubling by %.3e (tolerance %.1e)"
                % (self.report["step_halving_delta"], self.report["truncation_doubling_delta"],
                   self.report["tolerance"]),
                details=[self.report])


COMMANDS = {cls.name: cls for cls in (Simulate, SweepTau, Figure, CompareRW,
                                      CompareRate, CheckConvergence)}


def create_command(subcommand, **kwargs):
    """
    Returns the Command for *subcommand* built with *kwargs*.

    :raises ConfigError: for unknown subcommands or a missing figure name.
    """
    if subcommand not in COMMANDS:
        raise ConfigError("unknown subcommand '%s'" % subcommand,
                          details=[{"line": None, "field": "subcommand",
                                    "message": "use one of %s" % ", ".join(sorted(COMMANDS))}])
    cls = COMMANDS[subcommand]
    if subcommand == "figure" and not kwargs.get("figure"):
        raise ConfigError("the figure subcommand needs a preset name",
                          details=[{"line": None, "field": "figure",
                                    "message": "missing figure name"}])
    return cls(**kwargs)


def run_command(subcommand, config, jobs=1, figure=None, manager=None):
    """
    Runs *subcommand* with *config* and returns the exit status:
    0 on success, the exit code of the raised error otherwise.

    :param subcommand: one of simulate, sweep-tau, figure, compare-rw,
                       compare-rate, check-convergence
    :param config: ExperimentConfig
    :param jobs: worker processes for sweeps
    :param figure: preset name for the figure subcommand
    :param manager: CommandManager, a new one reporting into config.out_dir
                    by default
    """
    if manager is None:
        manager = CommandManager(out_dir=config.out_dir)
    kwargs = {"config": config, "jobs": jobs}
    if figure is not None:
        kwargs["figure"] = figure
    try:
        cmd = create_command(subcommand, **kwargs)
    except ConfigError as err:
        manager.error_func(err)
        return err.exit_code
    return manager.run(cmd)
