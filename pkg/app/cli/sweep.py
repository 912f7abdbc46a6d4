import logging

import pandas as pd

from app.cli.common import add_scenario_args, dump_config, parameter_echo, scenario_from_args, write_csv
from app.core.errors import ConfigError
from app.services.runner import CoherenceRunner
from app.services.scenario import SweepBlock

logger = logging.getLogger(__name__)


def run_sweep(args) -> int:
    scenario = scenario_from_args(args)
    if args.axis:
        scenario = scenario.model_copy(update={"sweep": SweepBlock(
            axis=args.axis, start=args.start, stop=args.stop, points=args.points,
            spacing=args.spacing,
        )})
    if args.dump_config:
        return dump_config(scenario, args.dump_config)
    if scenario.sweep is None:
        raise ConfigError("no sweep block in scenario and no --axis given", path=args.scenario)
    frame = CoherenceRunner().run_t2_sweep(scenario.name, scenario)
    write_csv(frame, args.output, parameter_echo([(scenario.name, scenario)]))
    return 0


def write_sweeps(frames: list[pd.DataFrame], output: str, header: list[str]):
    write_csv(pd.concat(frames, ignore_index=True), output, header)


def register(subparsers):
    p = subparsers.add_parser("sweep", help="T2 table over a swept parameter (dh, J or a sigma)")
    add_scenario_args(p, with_mode=False)
    p.add_argument("--axis", choices=["dh", "J", "sigma_charge", "sigma_magnetic"],
                   help="override the scenario's sweep block")
    p.add_argument("--start", type=float, help="first value (ueV)")
    p.add_argument("--stop", type=float, help="last value (ueV)")
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--spacing", choices=["linear", "log"], default="log")
    p.set_defaults(func=run_sweep)
