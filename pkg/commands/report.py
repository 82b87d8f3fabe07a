"""Report command module."""

import argparse
from pathlib import Path

from operations.report import ReportEmitter
from settings import Settings


def register(subparsers) -> None:
    """
    Add the ``report`` subcommand.

    :param subparsers: subparsers action of the main parser
    """
    parser = subparsers.add_parser("report", help="rank tables and figures")
    parser.add_argument(
        "--in", dest="in_dir", required=True, type=Path, help="experiment directory"
    )
    parser.add_argument("--plots", action="store_true", help="also write figures")
    parser.set_defaults(handler=report_command)


def report_command(args: argparse.Namespace, settings: Settings) -> int:
    """
    Emit the report of an experiment directory.

    :param args: parsed arguments
    :param settings: application settings
    :return: exit code
    """
    ReportEmitter(settings).emit_report(args.in_dir, plots=args.plots)
    return 0
