import logging

import numpy as np
import pandas as pd

from app.cli.common import add_scenario_args, dump_config, parameter_echo, scenario_from_args, write_csv
from app.core.units import natural_to_ns
from app.services.cumulant import EvalMode
from app.services.runner import CoherenceRunner, curves_to_frame

logger = logging.getLogger(__name__)


def run_coherence(args) -> int:
    scenario = scenario_from_args(args)
    if args.dump_config:
        return dump_config(scenario, args.dump_config)
    curves = CoherenceRunner().run_coherence([(scenario.name, scenario)])
    write_csv(curves_to_frame(curves), args.output, parameter_echo([(scenario.name, scenario)]))
    return 0


def run_t2(args) -> int:
    scenario = scenario_from_args(args)
    if args.dump_config:
        return dump_config(scenario, args.dump_config)
    runner = CoherenceRunner()
    row = {"curve": scenario.name}
    for mode in (EvalMode.FIRST_ORDER, EvalMode.RESUMMED):
        estimate = runner.t2(scenario, mode)
        row[f"T2_{mode.value}"] = estimate.t2 if estimate.reached else np.nan
        row[f"T2_{mode.value}_ns"] = natural_to_ns(estimate.t2) if estimate.reached else np.nan
    write_csv(pd.DataFrame([row]), args.output, parameter_echo([(scenario.name, scenario)]))
    return 0


def register(subparsers):
    p = subparsers.add_parser("coherence", help="W(t) and its factors on the scenario's time grid")
    add_scenario_args(p)
    p.set_defaults(func=run_coherence)

    p = subparsers.add_parser("t2", help="1/e dephasing time in both evaluation modes")
    add_scenario_args(p, with_mode=False)
    p.set_defaults(func=run_t2)
