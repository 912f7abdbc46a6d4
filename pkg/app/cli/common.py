import argparse
import json
import logging
import sys
from typing import TextIO

import pandas as pd

from app.services.cumulant import EvalMode
from app.services.scenario import Scenario, load_scenario, save_scenario, scenario_to_dict

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


def add_scenario_args(parser: argparse.ArgumentParser, with_mode: bool = True):
    parser.add_argument("scenario", help="scenario JSON file")
    parser.add_argument("-o", "--output", default="-", help="CSV destination (default: stdout)")
    parser.add_argument("--dump-config", metavar="PATH",
                        help="write the resolved scenario (natural units) and exit; '-' for stdout")
    if with_mode:
        parser.add_argument("--mode", choices=[m.value for m in EvalMode], help="override the scenario's eval mode")


def scenario_from_args(args) -> Scenario:
    scenario = load_scenario(args.scenario)
    mode = getattr(args, "mode", None)
    if mode:
        scenario = scenario.model_copy(update={"mode": EvalMode(mode)})
    return scenario


def dump_config(scenario: Scenario, path: str) -> int:
    if path == "-":
        json.dump(scenario_to_dict(scenario), sys.stdout, indent=4)
        sys.stdout.write("\n")
    else:
        save_scenario(scenario, path)
        logger.info(f"Resolved scenario written to {path}")
    return 0


def parameter_echo(scenarios: list[tuple[str, Scenario]]) -> list[str]:
    return [
        f"# {label}: {json.dumps(scenario_to_dict(s), sort_keys=True, separators=(',', ':'))}"
        for label, s in scenarios
    ]


def _write(stream: TextIO, frame: pd.DataFrame, header: list[str]):
    for line in header:
        stream.write(line + "\n")
    frame.to_csv(stream, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_csv(frame: pd.DataFrame, output: str, header: list[str] | None = None):
    """Data goes to stdout unless a file is named."""
    header = header or []
    if output in (None, "-"):
        _write(sys.stdout, frame, header)
        sys.stdout.flush()
        return
    with open(output, "w", encoding="utf-8", newline="") as f:
        _write(f, frame, header)
    logger.info(f"Wrote {len(frame)} row(s) to {output}")
