import logging

from app.cli.common import add_scenario_args, dump_config, parameter_echo, scenario_from_args, write_csv
from app.core.config import settings
from app.core.errors import ConfigError, ToleranceBreach
from app.services.runner import CoherenceRunner, curves_to_frame

logger = logging.getLogger(__name__)


def run_mc(args) -> int:
    scenario = scenario_from_args(args)
    if args.dump_config:
        return dump_config(scenario, args.dump_config)
    if scenario.mc is None:
        raise ConfigError("scenario has no 'mc' block", path=args.scenario)
    if args.traj:
        scenario = scenario.model_copy(update={"mc": scenario.mc.model_copy(update={"n_traj": args.traj})})

    curve = CoherenceRunner().run_mc(scenario.name, scenario, args.model_tol)
    write_csv(curves_to_frame([curve]), args.output, parameter_echo([(scenario.name, scenario)]))
    if curve.breaches:
        raise ToleranceBreach(len(curve.breaches), max(curve.breaches))
    return 0


def register(subparsers):
    p = subparsers.add_parser("mc", help="analytic W(t) next to the Monte Carlo reference")
    add_scenario_args(p)
    p.add_argument("--traj", type=int, help="override the number of trajectories")
    p.add_argument("--model-tol", type=float, default=settings.mc_model_tol,
                   help="allowed |W - W_mc| beyond 3 standard errors")
    p.set_defaults(func=run_mc)
