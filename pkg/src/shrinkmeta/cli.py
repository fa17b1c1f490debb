# SPDX-License-Identifier: GPL-2.0-or-later

__author__ = "shrinkmeta developers"
__status__ = "production"
__version__ = "1.0"
__date__ = "19 Oct 2026"

import argparse
import sys

from . import common
from .properties import new_config
from .utils.command_registry import CommandRegistry


EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

CONFIG_DEST_PREFIX = "cfg_"


class _ArgumentParser(argparse.ArgumentParser):
    """
    Usage errors exit with 1
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, "[ERROR] {}: {}\n".format(self.prog,
                                                             message))


def _flag(name):
    return "--" + name.replace("_", "-")


def _add_property(parser, name, prop, dest):
    kwargs = {"dest": dest, "default": None, "help": prop.description,
              "metavar": prop.metavar()}
    if prop.repeatable:
        kwargs["action"] = "append"
    parser.add_argument(_flag(name), **kwargs)


def build_parser():
    parser = _ArgumentParser(
        prog="shrinkmeta", allow_abbrev=False,
        description="Full-Bayes random-effects meta-analysis with shrinkage "
                    "estimates")
    parser.add_argument("--debug", action="store_true",
                        help="Print debug output to the error stream")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND",
                                       parser_class=_ArgumentParser)
    subparsers.required = True

    definitions = new_config().definitions()
    for cmd_class in CommandRegistry.commands():
        sub = subparsers.add_parser(cmd_class.idname,
                                    help=cmd_class.description,
                                    description=cmd_class.description,
                                    allow_abbrev=False)
        for name, prop in cmd_class.properties():
            _add_property(sub, name, prop, name)
        if cmd_class.use_analysis_config:
            group = sub.add_argument_group("analysis settings")
            for name, prop in definitions.items():
                _add_property(group, name, prop, CONFIG_DEST_PREFIX + name)
    return parser


def _command_options(cmd_class, args):
    opts = argparse.Namespace()
    for name, prop in cmd_class.properties():
        raw = getattr(args, name)
        if raw is None:
            value = prop.default
        else:
            try:
                value = prop.parse(raw)
            except ValueError as e:
                raise common.ValidationError(
                    "report-cli", "invalid value for {}: {}"
                    .format(_flag(name), e)) from None
        setattr(opts, name, value)
    return opts


def _analysis_config(args):
    config = new_config()
    for name in config.definitions():
        raw = getattr(args, CONFIG_DEST_PREFIX + name)
        if raw is not None:
            config.set(name, raw)
    return config


def _run(args):
    cmd_class = CommandRegistry.get(args.command)
    cmd = cmd_class()
    if cmd_class.use_analysis_config:
        cmd.config = _analysis_config(args)
    cmd.execute(_command_options(cmd_class, args))
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_VALIDATION
    if args.debug:
        common.enable_debug_mode()

    with common.collect_warnings() as caught:
        try:
            code = _run(args)
            error = None
        except common.ValidationError as e:
            code, error = EXIT_VALIDATION, e
        except common.NumericalError as e:
            code, error = EXIT_NUMERICAL, e
    for message in caught:
        print("[WARNING] {}".format(message), file=sys.stderr)
    if error is not None:
        print("[ERROR] {}".format(error), file=sys.stderr)
        common.debug_print(repr(error))
    return code
