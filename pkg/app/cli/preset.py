import logging

from app.cli.common import parameter_echo, write_csv
from app.cli.sweep import write_sweeps
from app.services.presets import PRESET_NAMES, build_preset
from app.services.runner import CoherenceRunner, curves_to_frame

logger = logging.getLogger(__name__)


def run_preset(args) -> int:
    preset = build_preset(args.name, args.points)
    runner = CoherenceRunner()
    header = parameter_echo(preset.scenarios)
    if preset.kind == "sweep":
        frames = [runner.run_t2_sweep(label, s) for label, s in preset.scenarios]
        write_sweeps(frames, args.output, header)
    else:
        write_csv(curves_to_frame(runner.run_coherence(preset.scenarios)), args.output, header)
    return 0


def register(subparsers):
    p = subparsers.add_parser("preset", help="reproduce a published figure's curves or T2 tables")
    p.add_argument("name", choices=PRESET_NAMES)
    p.add_argument("--points", type=int, help="time points per curve (sweep points for fig2a/fig2b)")
    p.add_argument("-o", "--output", default="-", help="CSV destination (default: stdout)")
    p.set_defaults(func=run_preset)
