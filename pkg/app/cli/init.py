import logging
import os

from app.services.scenario import default_scenario_path, write_default_scenario

logger = logging.getLogger(__name__)


def run_init(args) -> int:
    path = args.path or default_scenario_path()
    if os.path.exists(path) and not args.force:
        logger.error(f"{path} already exists (use --force to overwrite)")
        return 1
    write_default_scenario(path)
    return 0


def register(subparsers):
    p = subparsers.add_parser("init", help="write a starter scenario file")
    p.add_argument("path", nargs="?", help="destination (default: config/scenario.json)")
    p.add_argument("--force", action="store_true", help="overwrite an existing file")
    p.set_defaults(func=run_init)
