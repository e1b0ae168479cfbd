"""
The 'output' module writes result tables, JSON documents and the run
manifest. Data files contain no wall-clock information; timestamps only
appear in the odML manifest.
"""

import datetime
import json
import logging
import math

import numpy
import odml
import pandas as pd
import pydantic
import scipy
import yaml

from . import __version__
from .helpers import ensure_dir, get_format_for_file_type, output_path, to_builtin
from .info import AUTHOR, FLOAT_FORMAT, VERSION

logger = logging.getLogger(__name__)


def survival_table(series, rates):
    """
    Survival series with columns (n, t, P, lambda_n, w_n), one row per
    measurement including n = 0. lambda_n belongs to the interval starting
    at row n; rows without a following interval hold NaN.
    """
    count = len(series.probs)
    lambdas = list(rates.lambdas) + [math.nan] * (count - len(rates.lambdas))
    scaled = list(rates.scaled) + [math.nan] * (count - len(rates.scaled))
    return pd.DataFrame({"n": range(count),
                         "t": series.times,
                         "P": series.probs,
                         "lambda_n": lambdas[:count],
                         "w_n": scaled[:count]})


def sweep_table(sweep):
    """
    Long form (tau, N, Lambda) table of a SweepResult, ordered by N and tau.
    """
    rows = []
    for i, n_meas in enumerate(sweep.n_list):
        for j, tau in enumerate(sweep.taus):
            rows.append((float(tau), n_meas, float(sweep.Lambda[i, j])))
    return pd.DataFrame(rows, columns=["tau", "N", "Lambda"])


def transitions_document(sweep):
    """
    Per-N transition lists with QZE/QAZE segments and the flatness and
    smoothness flags.
    """
    doc = {}
    for n_meas in sweep.n_list:
        result = sweep.transitions[n_meas].to_dict()
        result.pop("N")
        doc[str(n_meas)] = result
    if sweep.errors:
        doc["errors"] = {str(float(sweep.taus[i])): msg for i, msg in sorted(sweep.errors.items())}
    return doc


def versions():
    return {"zenolab": __version__,
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "pandas": pd.__version__,
            "pydantic": pydantic.VERSION,
            "pyyaml": yaml.__version__,
            "odml": getattr(odml, "__version__", getattr(odml, "VERSION", "unknown"))}


class OutputWriter(object):
    """
    Writes tables in the configured format into *out_dir* and keeps
    the list of written files.
    """
    def __init__(self, out_dir, file_type="csv"):
        self.out_dir = out_dir
        self.format = get_format_for_file_type(file_type)
        self.written = []

    def table(self, name, frame):
        """
        Writes a pandas DataFrame as CSV with 17 significant digits, or as
        JSON records.
        """
        ensure_dir(self.out_dir)
        path = output_path(self.out_dir, name, self.format)
        if self.format == "CSV":
            frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="nan")
        else:
            records = to_builtin(frame.to_dict(orient="list"))
            with open(path, "w") as out_file:
                json.dump({"columns": list(frame.columns), "data": records}, out_file,
                          indent=1)
                out_file.write("\n")
        logger.debug("wrote %d rows to %s", len(frame), path)
        self.written.append(path)
        return path

    def document(self, name, data):
        """
        Writes *data* as indented JSON with sorted keys.
        """
        ensure_dir(self.out_dir)
        path = output_path(self.out_dir, name, "json")
        with open(path, "w") as out_file:
            json.dump(to_builtin(data), out_file, indent=2, sort_keys=True)
            out_file.write("\n")
        self.written.append(path)
        return path

    def manifest(self, config, command, summary=None):
        """
        Saves the run manifest as an odML JSON document: the configuration
        echo, the run summary (truncation, convergence flags), the list of
        written files and the library versions.
        """
        ensure_dir(self.out_dir)
        doc = build_manifest(config, command, summary or {}, list(self.written))
        path = output_path(self.out_dir, "manifest", "json")
        odml.save(doc, path, "JSON")
        return path


def _add_properties(section, values):
    for key in sorted(values):
        val = to_builtin(values[key])
        if val is None:
            continue
        if isinstance(val, dict):
            val = json.dumps(val, sort_keys=True)
        if isinstance(val, list) and any(isinstance(item, (list, dict)) for item in val):
            val = json.dumps(val, sort_keys=True)
        if isinstance(val, list) and not val:
            continue
        odml.Property(name=str(key), values=val, parent=section)


def build_manifest(config, command, summary, files):
    """
    Returns the odML Document describing one run.
    """
    doc = odml.Document(author=AUTHOR, version=VERSION, date=datetime.date.today())

    conf_sec = odml.Section(name="config", type="zeno-lab/config", parent=doc)
    _add_properties(conf_sec, config.model_dump())

    run_sec = odml.Section(name="run", type="zeno-lab/run", parent=doc)
    run_values = {"command": command}
    run_values.update(summary)
    _add_properties(run_sec, run_values)

    files_sec = odml.Section(name="files", type="zeno-lab/files", parent=doc)
    _add_properties(files_sec, {"written": files})

    ver_sec = odml.Section(name="versions", type="software", parent=doc)
    _add_properties(ver_sec, versions())

    return doc
