"""Main module."""

import sys
from typing import Optional, Sequence

from loguru import logger
from pydantic import ValidationError

from commands.router import create_parser
from exceptions import SaweiError
from settings import Settings, get_settings


def configure_logging(settings: Settings) -> None:
    """
    Replace the default loguru sink with one stderr sink.

    :param settings: application settings
    """
    logger.remove()
    logger.add(sys.stderr, level=settings.log_level.upper())


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main entry point for the command line.

    :param argv: arguments, ``sys.argv[1:]`` when omitted
    :return: 0 on success, 1 on domain or I/O errors, 2 on invalid configuration
    """
    args = create_parser().parse_args(argv)
    try:
        settings = get_settings()
        configure_logging(settings)
        return args.handler(args, settings)
    except ValidationError as exc:
        logger.error(f"Invalid configuration: {exc}")
        return 2
    except (SaweiError, OSError) as exc:
        logger.error(str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
