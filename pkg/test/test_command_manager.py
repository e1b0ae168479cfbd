"""
Tests for zenolab.command_manager.
"""

import io
import json
import os
import shutil
import tempfile
import unittest

from zenolab.command_manager import CommandManager, error_report, exit_code_for
from zenolab.commands import Command
from zenolab.config import ExperimentConfig
from zenolab.errors import (AnalysisError, ConfigError, ConvergenceError, TruncationError,
                            ZenoLabError)


class RecordingCommand(Command):
    """
    RecordingCommand(config=, failure=)

    Test command raising *failure* if given.
    """
    name = "record"

    def __init__(self, *args, **kwargs):
        self.failure = None
        super(RecordingCommand, self).__init__(*args, **kwargs)

    def _execute(self):
        if self.failure is not None:
            raise self.failure
        self.summary["done"] = True


class TestErrorReports(unittest.TestCase):
    def test_exit_codes(self):
        self.assertEqual(exit_code_for(ConfigError("bad key")), 2)
        self.assertEqual(exit_code_for(ConvergenceError("no")), 3)
        self.assertEqual(exit_code_for(TruncationError("n_max")), 3)
        self.assertEqual(exit_code_for(AnalysisError("zero")), 4)
        self.assertEqual(exit_code_for(ZenoLabError("generic")), 4)
        self.assertEqual(exit_code_for(RuntimeError("boom")), 4)

    def test_report(self):
        err = ConfigError("bad key", details=[{"line": 3, "field": "gama", "message": "x"}])
        self.assertEqual(error_report(err), {"error": "ConfigError", "message": "bad key",
                                             "exit_code": 2,
                                             "details": [{"line": 3, "field": "gama",
                                                          "message": "x"}]})
        report = error_report(ValueError("nope"))
        self.assertEqual(report["error"], "ValueError")
        self.assertEqual(report["exit_code"], 4)
        self.assertEqual(report["details"], [])


class TestCommandManager(unittest.TestCase):
    def setUp(self):
        self.tmp_dir = tempfile.mkdtemp(prefix="zenolab_")
        self.stream = io.StringIO()
        self.config = ExperimentConfig(out_dir=self.tmp_dir)
        self.manager = CommandManager(out_dir=self.tmp_dir, stream=self.stream)

    def tearDown(self):
        shutil.rmtree(self.tmp_dir)

    def test_success(self):
        succeeded = []
        self.manager.on_success = succeeded.append
        cmd = RecordingCommand(config=self.config)
        self.assertEqual(self.manager.run(cmd), 0)
        self.assertEqual(len(self.manager), 1)
        self.assertEqual(succeeded, [cmd])
        self.assertTrue(os.path.isfile(os.path.join(self.tmp_dir, "manifest.json")))
        self.assertFalse(os.path.exists(os.path.join(self.tmp_dir, "error.json")))
        self.assertEqual(self.stream.getvalue(), "")
        self.assertEqual(repr(cmd), "<RecordingCommand done=True>")

    def test_engine_failure(self):
        cmd = RecordingCommand(config=self.config, failure=RuntimeError("boom"))
        self.assertEqual(self.manager.run(cmd), 4)
        self.assertEqual(len(self.manager), 0)

        with open(os.path.join(self.tmp_dir, "error.json")) as err_file:
            report = json.load(err_file)
        self.assertEqual(report["error"], "RuntimeError")
        self.assertEqual(report["message"], "boom")
        self.assertEqual(self.manager.last_error, report)
        self.assertEqual(json.loads(self.stream.getvalue()), report)

    def test_execute_reraises(self):
        cmd = RecordingCommand(config=self.config, failure=TruncationError("n_max"))
        with self.assertRaises(TruncationError):
            self.manager.execute(cmd)
        self.assertEqual(self.manager.last_error["exit_code"], 3)

    def test_without_output_directory(self):
        manager = CommandManager(stream=self.stream)
        manager.error_func(ConfigError("bad"))
        self.assertEqual(json.loads(self.stream.getvalue())["error"], "ConfigError")
