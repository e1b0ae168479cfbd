#!/usr/bin/env python
import logging
import sys

from argparse import ArgumentParser

import zenolab

from .command_manager import CommandManager
from .commands import COMMANDS, run_command
from .config import ExperimentConfig, load_config
from .errors import ConfigError
from .presets import PRESETS

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"


def build_parser():
    """
    Returns the argument parser of the zeno-lab command line.
    """
    parser = ArgumentParser(prog="zeno-lab",
                            description="Quantum Zeno and anti-Zeno simulations of a "
                                        "qubit in a Lorentzian bath")
    parser.add_argument("--version", action="version",
                        version="%(prog)s " + zenolab.__version__)

    common = ArgumentParser(add_help=False)
    common.add_argument("--config", help="Experiment configuration file (YAML)")
    common.add_argument("--jobs", type=int, default=1,
                        help="Number of worker processes for sweeps")
    common.add_argument("--out", help="Output directory, overrides 'out_dir'")
    common.add_argument("--format", choices=["csv", "json"],
                        help="Table format, overrides 'format'")
    common.add_argument("--debug", help="Print debug messages", action="store_true")

    subparsers = parser.add_subparsers(dest="subcommand", metavar="<subcommand>")
    subparsers.required = True
    for name in sorted(COMMANDS):
        doc = (COMMANDS[name].__doc__ or "").strip().splitlines()
        sub = subparsers.add_parser(name, parents=[common],
                                    help=doc[-1].strip() if doc else None)
        if name == "figure":
            sub.add_argument("name", choices=sorted(PRESETS), help="Figure preset")
    return parser


def main(argv=None):
    """
    Parses *argv*, configures logging and runs the requested subcommand.

    Returns the exit status.
    """
    args = build_parser().parse_args(argv)

    zenolab.DEBUG = args.debug
    logging.basicConfig(level=logging.DEBUG if args.debug else logging.INFO,
                        format=LOG_FORMAT, stream=sys.stderr)

    try:
        config = load_config(args.config) if args.config else ExperimentConfig()
        config = config.override(out_dir=args.out, format=args.format)
    except ConfigError as err:
        manager = CommandManager(out_dir=args.out)
        manager.error_func(err)
        return err.exit_code

    if args.jobs < 1:
        err = ConfigError("--jobs must be >= 1",
                          details=[{"line": None, "field": "jobs",
                                    "message": "got %d" % args.jobs}])
        CommandManager(out_dir=config.out_dir).error_func(err)
        return err.exit_code

    figure = getattr(args, "name", None)
    return run_command(args.subcommand, config, jobs=args.jobs, figure=figure)


def run():
    """
    Console script entry point.
    """
    sys.exit(main())


if __name__ == "__main__":
    run()
