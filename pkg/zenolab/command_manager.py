"""
'command_manager' contains the 'CommandManager' class.

This class runs the commands of the command line front end and turns
any failure into a machine readable error report and an exit code.
"""

import json
import logging
import os
import sys

from .errors import EngineError, ZenoLabError
from .helpers import ensure_dir

logger = logging.getLogger(__name__)

ERROR_FILE = "error.json"


def error_report(err):
    """
    Returns the JSON serializable report of an exception. Errors outside
    the zeno-lab hierarchy are reported as engine failures.
    """
    if isinstance(err, ZenoLabError):
        return err.to_dict()
    return {"error": err.__class__.__name__,
            "message": str(err),
            "exit_code": EngineError.exit_code,
            "details": []}


def exit_code_for(err):
    if isinstance(err, ZenoLabError):
        return err.exit_code
    return EngineError.exit_code


class CommandManager(object):
    """
    The CommandManager class executes commands, keeps the history of
    successful ones and reports errors to *stream* and to an
    error.json file in *out_dir*.
    """
    def __init__(self, out_dir=None, stream=None):
        self.history = []
        self.out_dir = out_dir
        self.stream = stream
        self.last_error = None

    def execute(self, cmd):
        """
        *execute* runs a given command *cmd* and on
        success adds it to the history.

        :param cmd: zenolab.commands.Command object
        """
        try:
            cmd()
        except Exception as err:
            self.error_func(err)
            raise

        self.history.append(cmd)
        self.on_success(cmd)

    def run(self, cmd):
        """
        *run* executes *cmd* and returns the exit status instead
        of raising.
        """
        try:
            self.execute(cmd)
        except Exception as err:
            return exit_code_for(err)
        return 0

    def __len__(self):
        return len(self.history)

    def error_func(self, err):
        """
        *error_func* writes the error report as a single JSON line to the
        stream (stderr by default) and to error.json in the output directory.
        """
        report = error_report(err)
        self.last_error = report
        if isinstance(err, ZenoLabError):
            logger.error("%s: %s", report["error"], report["message"])
        else:
            logger.exception("unexpected failure")

        stream = self.stream if self.stream is not None else sys.stderr
        stream.write(json.dumps(report, sort_keys=True) + "\n")

        if self.out_dir:
            try:
                ensure_dir(self.out_dir)
                with open(os.path.join(self.out_dir, ERROR_FILE), "w") as err_file:
                    json.dump(report, err_file, indent=2, sort_keys=True)
                    err_file.write("\n")
            except (IOError, OSError) as exc:
                logger.warning("could not write %s: %s", ERROR_FILE, exc)

    def on_success(self, cmd):
        """
        Called after a command finished without error.

        The actual method is set on the instance at the point of usage.
        """
        pass
