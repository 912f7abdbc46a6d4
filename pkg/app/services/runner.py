import concurrent.futures
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from app.core.config import settings
from app.core.units import natural_to_ns
from app.services.cumulant import (
    CoherencePoint,
    EvalMode,
    T2Estimate,
    coherence,
    t2_estimates,
    t2_extract,
)
from app.services.oracle import TrajectoryResult, mc_coherence
from app.services.scenario import Scenario

logger = logging.getLogger(__name__)

COHERENCE_COLUMNS = [
    "curve", "t_ns", "t_natural", "W", "phase", "c_z", "c_x", "even_linked",
    "even_semilinked_exp", "odd_phase", "axis_re", "axis_im",
]
T2_WINDOW_POINTS = 201
T2_REFINE_POINTS = 41


@dataclass
class Curve:
    label: str
    scenario: Scenario
    points: list[CoherencePoint]
    mc: TrajectoryResult | None = None
    breaches: list[float] = field(default_factory=list)


class CoherenceRunner:
    """Evaluates scenarios point by point through a thread pool; output keeps grid order."""

    def __init__(self, workers: int | None = None):
        self.workers = workers or settings.workers

    def curve(self, scenario: Scenario, t_grid=None, mode: EvalMode | None = None) -> list[CoherencePoint]:
        grid = scenario.t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
        mode = mode or scenario.mode
        noise, wp = scenario.two_axis, scenario.wp
        seq, omega1 = scenario.sequence, scenario.omega1

        results: list[CoherencePoint | None] = [None] * len(grid)
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.workers) as executor:
            futures = {
                executor.submit(coherence, noise, wp, seq, float(t), mode, scenario.semilinked, omega1): i
                for i, t in enumerate(grid)
            }
            for future in concurrent.futures.as_completed(futures):
                results[futures[future]] = future.result()
        return results

    def run_coherence(self, scenarios: list[tuple[str, Scenario]]) -> list[Curve]:
        curves = []
        for label, scenario in scenarios:
            logger.info(f"Evaluating curve '{label}' ({scenario.sequence.label}, {scenario.mode.value})")
            curves.append(Curve(label, scenario, self.curve(scenario)))
        return curves

    def t2(self, scenario: Scenario, mode: EvalMode | None = None) -> T2Estimate:
        """
        First 1/e crossing. The window starts at twice the closed-form estimate
        (or t_max) and doubles until a crossing is bracketed, then the bracket is
        resampled finely.
        """
        guess = t2_estimates(scenario.two_axis, scenario.wp, scenario.sequence, scenario.omega1).shortest()
        window = 2.0 * guess if guess else scenario.time.t_max
        for _ in range(settings.t2_max_doublings + 1):
            grid = np.linspace(0.0, window, T2_WINDOW_POINTS)
            points = self.curve(scenario, grid, mode)
            estimate = t2_extract(points)
            if estimate.reached:
                k = int(np.searchsorted(grid, estimate.t2))
                lo, hi = grid[max(k - 1, 0)], grid[min(k, len(grid) - 1)]
                if hi > lo:
                    fine = self.curve(scenario, np.linspace(lo, hi, T2_REFINE_POINTS), mode)
                    refined = t2_extract(fine)
                    if refined.reached:
                        return refined
                return estimate
            window *= 2.0
        logger.warning(f"No 1/e crossing for '{scenario.name}' below t={window / 2.0:.4g}")
        return T2Estimate(None, False)

    def run_t2_sweep(self, label: str, scenario: Scenario) -> pd.DataFrame:
        sweep = scenario.sweep
        if sweep is None:
            raise ValueError(f"scenario '{scenario.name}' has no sweep block")
        rows = []
        for value in sweep.values():
            point = scenario.with_point(sweep.axis, float(value), sweep)
            row = {"curve": label, sweep.axis: float(value)}
            for mode in (EvalMode.FIRST_ORDER, EvalMode.RESUMMED):
                t2 = self.t2(point, mode).t2
                row[f"T2_{mode.value}"] = np.nan if t2 is None else t2
                row[f"T2_{mode.value}_ns"] = np.nan if t2 is None else natural_to_ns(t2)
            rows.append(row)
        return pd.DataFrame(rows)

    def run_mc(self, label: str, scenario: Scenario, model_tol: float | None = None) -> Curve:
        if scenario.mc is None:
            raise ValueError(f"scenario '{scenario.name}' has no mc block")
        tol = settings.mc_model_tol if model_tol is None else model_tol
        grid = np.linspace(0.0, scenario.time.t_max, scenario.mc.points)
        cfg = scenario.mc.to_config(grid)
        analytic = self.curve(scenario, grid)
        mc = mc_coherence(scenario.two_axis, scenario.wp, scenario.sequence, grid, cfg, self.workers)

        gap = np.abs(np.array([p.W for p in analytic]) - mc.W)
        excess = gap - (3.0 * mc.stderr + tol)
        breaches = [float(e) for e in excess if e > 0]
        if breaches:
            logger.warning(f"'{label}': {len(breaches)} point(s) outside 3·stderr + {tol:g}")
        return Curve(label, scenario, analytic, mc, breaches)


def curves_to_frame(curves: list[Curve]) -> pd.DataFrame:
    rows = []
    for curve in curves:
        for i, p in enumerate(curve.points):
            row = {
                "curve": curve.label,
                "t_ns": natural_to_ns(p.t),
                "t_natural": p.t,
                "W": p.W,
                "phase": p.phase,
                "c_z": p.c_z,
                "c_x": p.c_x,
                "even_linked": p.even_linked,
                "even_semilinked_exp": p.even_semilinked_exponent,
                "odd_phase": p.odd_phase + p.odd_semilinked_phase,
                "axis_re": p.axis_term.real,
                "axis_im": p.axis_term.imag,
            }
            if curve.mc is not None:
                row["W_mc"] = float(curve.mc.W[i])
                row["W_mc_stderr"] = float(curve.mc.stderr[i])
            rows.append(row)
    frame = pd.DataFrame(rows)
    if frame.empty:
        return pd.DataFrame(columns=COHERENCE_COLUMNS)
    return frame
