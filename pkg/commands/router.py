"""Main command router module."""

import argparse

from commands import report, run, sweep


def create_parser() -> argparse.ArgumentParser:
    """
    Command line parser with every subcommand registered.

    :return: parser whose subcommands set a ``handler`` default
    """
    parser = argparse.ArgumentParser(
        prog="sawei",
        description="Self-adjusting weighted expected improvement benchmarks",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run.register(subparsers)
    sweep.register(subparsers)
    report.register(subparsers)
    return parser
