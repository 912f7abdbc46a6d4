import logging
import math

import numpy as np
import pandas as pd

from app.cli.common import add_scenario_args, dump_config, parameter_echo, scenario_from_args, write_csv
from app.services.model import NoiseSpectrum, psd_eval, total_variance
from app.services.oracle import FrequencyBins, NoiseRealization, estimate_psd, log_bands, trajectory_streams

logger = logging.getLogger(__name__)


def synthesis_table(name: str, spec: NoiseSpectrum, n_traj: int, n_steps: int, dt: float,
                    n_freq: int, seed: int) -> pd.DataFrame:
    """Ensemble variance and band-averaged periodogram against the model spectrum."""
    bins = FrequencyBins.of(spec, n_freq)
    realization = NoiseRealization.draw(spec, bins, [trajectory_streams(seed, i)[0] for i in range(n_traj)])
    rows = []

    points = realization.at(np.linspace(0.0, n_steps * dt, 16))
    variance = float(np.mean(np.var(points, axis=0, ddof=1)))
    expected = total_variance(spec)
    rows.append({"spectrum": name, "quantity": "variance", "omega": np.nan,
                 "model": expected, "estimate": variance,
                 "ratio": variance / expected if expected > 0 else np.nan})

    if spec.amplitude > 0:
        edges = np.linspace(0.0, n_steps * dt, n_steps + 1)
        samples = realization.sample(edges)
        # one decade above the record length up to a decade below Nyquist
        lo = max(spec.omega_low, 10.0 * 2.0 * math.pi / (n_steps * dt))
        hi = min(spec.omega_uv, 0.1 * math.pi / dt)
        if hi > lo:
            centres, values = estimate_psd(samples, dt, log_bands(lo, hi))
            model = psd_eval(spec, centres)
            for w, m, v in zip(centres, model, values):
                rows.append({"spectrum": name, "quantity": "psd", "omega": w, "model": m,
                             "estimate": v, "ratio": v / m if m > 0 else np.nan})
    return pd.DataFrame(rows)


def run_psd_check(args) -> int:
    scenario = scenario_from_args(args)
    if args.dump_config:
        return dump_config(scenario, args.dump_config)
    seed = scenario.mc.seed if scenario.mc else 1234
    n_freq = scenario.mc.n_freq if scenario.mc else 1024
    frames = [
        synthesis_table(name, spec, args.traj, args.steps, args.dt, n_freq, seed)
        for name, spec in (("charge", scenario.noise.charge), ("magnetic", scenario.noise.magnetic))
    ]
    write_csv(pd.concat(frames, ignore_index=True), args.output, parameter_echo([(scenario.name, scenario)]))
    return 0


def register(subparsers):
    p = subparsers.add_parser("psd-check", help="compare synthesized noise with the model spectra")
    add_scenario_args(p, with_mode=False)
    p.add_argument("--traj", type=int, default=200)
    p.add_argument("--steps", type=int, default=32768)
    p.add_argument("--dt", type=float, default=0.02, help="sample spacing (natural time units)")
    p.set_defaults(func=run_psd_check)
