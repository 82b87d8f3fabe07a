"""Run command module."""

import argparse
from pathlib import Path

from loguru import logger

from operations.experiment_runner import ExperimentRunner, load_experiment_config
from settings import Settings


def register(subparsers) -> None:
    """
    Add the ``run`` subcommand.

    :param subparsers: subparsers action of the main parser
    """
    parser = subparsers.add_parser("run", help="run every task x schedule x seed")
    parser.add_argument("--config", required=True, type=Path, help="experiment JSON")
    parser.add_argument("--out", required=True, type=Path, help="output directory")
    parser.add_argument("--workers", type=int, default=None, help="worker pool size")
    parser.set_defaults(handler=run_command)


def run_command(args: argparse.Namespace, settings: Settings) -> int:
    """
    Execute an experiment.

    :param args: parsed arguments
    :param settings: application settings
    :return: exit code
    """
    cfg = load_experiment_config(args.config)
    manifest = ExperimentRunner(settings, args.workers).run_experiment(cfg, args.out)
    logger.info(
        f"{len(manifest.runs) - len(manifest.aborted)} of {len(manifest.runs)} runs "
        f"completed"
    )
    return 0
