import argparse
import logging
import sys

# 1. IMMEDIATE LOGGING CONFIGURATION
# Defined first so imports and early failures are captured
class ColorFormatter(logging.Formatter):
    GREY = "\x1b[38;20m"
    GREEN = "\x1b[32;20m"
    YELLOW = "\x1b[33;20m"
    RED = "\x1b[31;20m"
    BOLD_RED = "\x1b[31;1m"
    RESET = "\x1b[0m"

    LEVEL_COLORS = {
        logging.DEBUG: GREY,
        logging.INFO: GREEN,
        logging.WARNING: YELLOW,
        logging.ERROR: RED,
        logging.CRITICAL: BOLD_RED
    }

    def format(self, record):
        color = self.LEVEL_COLORS.get(record.levelno, "")
        reset = self.RESET if color else ""
        fmt = f"{color}%(levelname)s:{reset} %(asctime)s - %(name)s - %(message)s"
        formatter = logging.Formatter(fmt)
        return formatter.format(record)


def configure_logging(app_settings=None, level_name: str | None = None):
    from app.core.config import settings
    app_settings = app_settings or settings
    level_name = level_name or app_settings.log_level
    level = getattr(logging, level_name.upper(), logging.WARNING)

    root_logger = logging.getLogger()
    for h in root_logger.handlers[:]:
        root_logger.removeHandler(h)

    # stdout carries data only
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(ColorFormatter())
    root_logger.addHandler(console_handler)

    if app_settings.log_to_file:
        file_handler = logging.FileHandler(app_settings.log_file)
        file_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
        root_logger.addHandler(file_handler)

    root_logger.setLevel(level)


from app.core.config import settings
configure_logging()
logger = logging.getLogger(__name__)

from app.cli import coherence, init, mc, preset, psd, sweep
from app.core.errors import ConfigError, DephasingError, ToleranceBreach

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_TOLERANCE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twoaxis",
        description="Dephasing of a qubit under two-axis low-frequency noise: resummed cumulant "
                    "model, Monte Carlo reference and figure presets.",
    )
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help=f"diagnostics on stderr (default: {settings.log_level})")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in (coherence, sweep, mc, psd, preset, init):
        module.register(subparsers)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        configure_logging(settings, args.log_level)

    try:
        return args.func(args)
    except ToleranceBreach as e:
        logger.error(str(e))
        return EXIT_TOLERANCE
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except DephasingError as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_CONFIG
    except (ArithmeticError, MemoryError) as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
