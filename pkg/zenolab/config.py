"""
The 'config' module reads and writes experiment configurations.

A configuration is a flat YAML key-value document, e.g.::

    delta: 1.0
    omega0: 1.0
    g: 0.5
    gamma: 0.1
    state: "3-4"
    tau: 1.0
    n: 16

Unknown keys are rejected; every diagnostic carries the line of the
offending key.
"""

import logging
import math

from typing import Literal, Optional, Tuple

import yaml

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, \
    model_validator

from .dynamics import IntegratorConfig, MeasurementKind, ProjectionFrame, ZenoProtocol
from .errors import ConfigError
from .model import HilbertConfig, ModelParams, QubitState

logger = logging.getLogger(__name__)

STATE_NORM_TOL = 1e-9

STATE_PRESETS = {
    "e": (1.0, 0.0, 0.0, 0.0),
    "g": (0.0, 0.0, 1.0, 0.0),
    "3-4": (0.6, 0.0, 0.8, 0.0),
    "4-3": (0.8, 0.0, 0.6, 0.0),
    "0.8-0.6": (0.8, 0.0, 0.6, 0.0),
    "3-4-phase-pi8": (0.6, 0.0, 0.8 * math.cos(math.pi / 8), 0.8 * math.sin(math.pi / 8)),
}

Amplitudes = Tuple[float, float, float, float]


def resolve_state(value):
    """
    Returns the amplitudes (alpha_re, alpha_im, beta_re, beta_im) of a preset
    name or an explicit four element sequence.
    """
    if isinstance(value, str):
        if value not in STATE_PRESETS:
            raise ValueError("unknown state preset '%s', use one of %s"
                             % (value, ", ".join(sorted(STATE_PRESETS))))
        return STATE_PRESETS[value]
    try:
        amps = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ValueError("state must be a preset name or [alpha_re, alpha_im, "
                         "beta_re, beta_im]")
    if len(amps) != 4:
        raise ValueError("state needs four amplitudes, got %d" % len(amps))
    norm = sum(a * a for a in amps)
    if abs(norm - 1.0) > STATE_NORM_TOL:
        raise ValueError("state is not normalized: |alpha|^2 + |beta|^2 = %.12g" % norm)
    return amps


def state_from_amplitudes(amps):
    """
    QubitState for validated amplitudes; the residual norm error below
    STATE_NORM_TOL is divided out.
    """
    alpha = complex(amps[0], amps[1])
    beta = complex(amps[2], amps[3])
    norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    return QubitState(alpha / norm, beta / norm)


class ExperimentConfig(BaseModel):
    """
    Validated experiment configuration with all defaults filled.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    # model
    delta: float = Field(1.0, gt=0)
    omega0: float = Field(1.0, gt=0)
    g: float = Field(0.5, ge=0)
    gamma: float = Field(0.1, ge=0)
    variant: Literal["rabi", "jc"] = "rabi"
    state: Amplitudes = STATE_PRESETS["e"]

    # protocol
    tau: float = Field(1.0, gt=0)
    n: int = Field(16, ge=0)
    measurement: Literal["selective", "nonselective", "none"] = "selective"
    target: Optional[Amplitudes] = None
    pre_evolution_time: float = Field(0.0, ge=0)
    factorize: bool = False
    projection_frame: Literal["lab", "rotating"] = "lab"
    samples_per_interval: int = Field(0, ge=0)

    # integrator
    steps_per_interval: int = Field(20, ge=10)
    step_factor: float = Field(0.02, gt=0, le=0.05)
    convergence_tol: float = Field(1e-6, gt=0)

    # truncation
    n_max: int = Field(12, ge=1, le=128)
    adaptive: bool = True

    # sweep
    tau_min: float = Field(0.05, gt=0)
    tau_max: float = Field(6.0, gt=0)
    tau_points: int = Field(60, ge=4)
    tau_spacing: Literal["log", "linear"] = "log"
    n_list: Tuple[int, ...] = (1, 2, 4, 8, 16)
    survival_model: Literal["master", "kka"] = "master"

    # rate equation
    rate_reset: bool = True

    # outputs
    out_dir: str = "results"
    format: Literal["csv", "json"] = "csv"

    @field_validator("state", "target", mode="before")
    @classmethod
    def _resolve_state(cls, value):
        if value is None:
            return value
        return resolve_state(value)

    @field_validator("n_list")
    @classmethod
    def _check_n_list(cls, value):
        if not value:
            raise ValueError("n_list must not be empty")
        if min(value) < 1:
            raise ValueError("n_list entries must be >= 1")
        return tuple(sorted(set(value)))

    @model_validator(mode="after")
    def _check_ranges(self):
        if self.tau_min >= self.tau_max:
            raise ValueError("tau_min must be smaller than tau_max")
        return self

    def to_params(self):
        return ModelParams(delta=self.delta, omega0=self.omega0, g=self.g,
                           gamma=self.gamma, variant=self.variant)

    def to_state(self):
        return state_from_amplitudes(self.state)

    def to_protocol(self):
        target = state_from_amplitudes(self.target) if self.target is not None else None
        return ZenoProtocol(tau=self.tau, n_meas=self.n,
                            measurement=MeasurementKind(self.measurement), target=target,
                            pre_evolution_time=self.pre_evolution_time,
                            factorize=self.factorize,
                            projection_frame=ProjectionFrame(self.projection_frame))

    def to_integrator(self):
        return IntegratorConfig(steps_per_interval=self.steps_per_interval,
                                step_factor=self.step_factor,
                                convergence_tol=self.convergence_tol)

    def to_hilbert(self):
        return HilbertConfig(self.n_max)

    def tau_grid(self):
        # local import, analysis pulls in the process pool machinery
        from .analysis import default_tau_grid
        return default_tau_grid(self.tau_min, self.tau_max, self.tau_points, self.tau_spacing)

    def override(self, **kwargs):
        """
        Returns a validated copy with every not-None entry of *kwargs* replaced.
        """
        values = self.model_dump()
        values.update({key: val for key, val in kwargs.items() if val is not None})
        try:
            return ExperimentConfig(**values)
        except ValidationError as exc:
            raise ConfigError("invalid override: %s" % _summary(exc),
                              details=_diagnostics(exc, {}))


def _key_lines(text):
    """
    Maps every top level key of a YAML mapping to its 1-based line.
    """
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {key.value: key.start_mark.line + 1 for key, _ in node.value}


def _diagnostics(exc, lines):
    details = []
    for err in exc.errors():
        loc = [str(item) for item in err.get("loc", ())]
        name = loc[0] if loc else None
        details.append({"line": lines.get(name),
                        "field": ".".join(loc) if loc else None,
                        "message": err.get("msg", "")})
    return details


def _summary(exc):
    parts = []
    for detail in _diagnostics(exc, {}):
        parts.append("%s: %s" % (detail["field"] or "config", detail["message"]))
    return "; ".join(parts)


def parse_config(text):
    """
    Parses and validates configuration *text*.

    :param text: YAML key-value document.
    :return: ExperimentConfig
    :raises ConfigError: on malformed text or schema violations.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError("malformed configuration: %s" % exc,
                          details=[{"line": line, "field": None, "message": str(exc)}])

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a key-value mapping",
                          details=[{"line": 1, "field": None,
                                    "message": "expected a mapping, got %s"
                                               % type(data).__name__}])

    lines = _key_lines(text)
    try:
        config = ExperimentConfig(**{str(key): val for key, val in data.items()})
    except ValidationError as exc:
        details = _diagnostics(exc, lines)
        located = ["line %s: %s: %s" % (d["line"], d["field"], d["message"])
                   if d["line"] else "%s: %s" % (d["field"] or "config", d["message"])
                   for d in details]
        raise ConfigError("invalid configuration: %s" % "; ".join(located), details=details)

    logger.debug("parsed configuration with %d explicit keys", len(data))
    return config


def dump_config(config):
    """
    Canonical text of *config*: sorted keys, states as explicit amplitudes.
    parse_config(dump_config(config)) == config.
    """
    values = config.model_dump()
    for key, val in values.items():
        if isinstance(val, tuple):
            values[key] = list(val)
    return yaml.safe_dump(values, sort_keys=True, default_flow_style=None)


def load_config(path):
    """
    Reads and parses the configuration file at *path*.
    """
    try:
        with open(path) as conf_file:
            text = conf_file.read()
    except (IOError, OSError) as exc:
        raise ConfigError("cannot read configuration file '%s': %s" % (path, exc),
                          details=[{"line": None, "field": None, "message": str(exc)}])
    return parse_config(text)

