"""Sweep command module."""

import argparse
from pathlib import Path

from operations.experiment_runner import (
    ExperimentRunner,
    load_ablation_grid,
    load_experiment_config,
)
from settings import Settings


def register(subparsers) -> None:
    """
    Add the ``sweep`` subcommand.

    :param subparsers: subparsers action of the main parser
    """
    parser = subparsers.add_parser("sweep", help="SAWEI hyperparameter ablation")
    parser.add_argument("--config", required=True, type=Path, help="experiment JSON")
    parser.add_argument(
        "--grid", default="default", help="'default' or an ablation grid JSON"
    )
    parser.add_argument("--out", required=True, type=Path, help="output directory")
    parser.add_argument("--workers", type=int, default=None, help="worker pool size")
    parser.set_defaults(handler=sweep_command)


def sweep_command(args: argparse.Namespace, settings: Settings) -> int:
    """
    Execute an ablation sweep.

    :param args: parsed arguments
    :param settings: application settings
    :return: exit code
    """
    cfg = load_experiment_config(args.config)
    grid = load_ablation_grid(args.grid)
    ExperimentRunner(settings, args.workers).ablation_sweep(cfg, grid, args.out)
    return 0
