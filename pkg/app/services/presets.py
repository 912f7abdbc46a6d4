"""
Parameter sets of the published figures.

Charge noise on J uses σ0J for the quasi-static part and A_J = σ0J/5 for the
1/f amplitude unless a figure states A_J explicitly.
"""
import logging
from dataclasses import dataclass

from app.core.units import ENERGY_UNITS
from app.services.cumulant import EvalMode, t2_estimates
from app.services.model import NoiseSpectrum
from app.services.scenario import NoiseBlock, Scenario, SweepBlock, TimeBlock, WorkingPointBlock
from app.services.sequences import PulseSequence

logger = logging.getLogger(__name__)

NEV = ENERGY_UNITS["nev"]
PEV = ENERGY_UNITS["pev"]
A_H = 66 * PEV
CHARGE_AMPLITUDE_RATIO = 0.2

PRESET_NAMES = ("fig1a", "fig1b", "fig2a", "fig2b", "fig3")


@dataclass
class Preset:
    name: str
    kind: str  # "coherence" or "sweep"
    scenarios: list[tuple[str, Scenario]]


def _charge(sigma: float, amplitude: float | None = None) -> NoiseSpectrum:
    amp = CHARGE_AMPLITUDE_RATIO * sigma if amplitude is None else amplitude
    return NoiseSpectrum(sigma_qs=sigma, amplitude=amp)


def _scenario(name: str, j: float, dh: float, charge: NoiseSpectrum, magnetic: NoiseSpectrum,
              seq: PulseSequence, mode: EvalMode = EvalMode.RESUMMED, semilinked: bool = True,
              sweep: SweepBlock | None = None) -> Scenario:
    return Scenario(
        name=name,
        working_point=WorkingPointBlock(J=j, dh=dh),
        noise=NoiseBlock(charge=charge, magnetic=magnetic),
        sequence=seq,
        time=TimeBlock(t_max=1.0),
        mode=mode,
        semilinked=semilinked,
        sweep=sweep,
    )


def _fit_window(scenarios: list[tuple[str, Scenario]], points: int) -> list[tuple[str, Scenario]]:
    """Shared t range [0, 2·max T2 estimate] across the curves of one preset."""
    estimates = []
    for _, s in scenarios:
        value = t2_estimates(s.two_axis, s.wp, s.sequence, s.omega1).shortest()
        if value:
            estimates.append(value)
    t_max = 2.0 * max(estimates) if estimates else 1000.0
    time = TimeBlock(t_max=t_max, points=points)
    return [(label, s.model_copy(update={"time": time})) for label, s in scenarios]


def _both_modes(label: str, scenario: Scenario) -> list[tuple[str, Scenario]]:
    return [
        (f"{label} {mode.value}", scenario.model_copy(update={"mode": mode}))
        for mode in (EvalMode.FIRST_ORDER, EvalMode.RESUMMED)
    ]


def fig1a(points: int = 200) -> Preset:
    """FID at J = 0.5 μeV, δh = 0: σ0H = 0.1 μeV, A_H = 66 peV, σ0J ∈ {1, 5} neV."""
    magnetic = NoiseSpectrum(sigma_qs=0.1, amplitude=A_H)
    out = []
    for sigma_j in (1.0, 5.0):
        s = _scenario(f"fig1a sJ={sigma_j:g}neV", 0.5, 0.0, _charge(sigma_j * NEV), magnetic, PulseSequence.fid())
        out.extend(_both_modes(f"sJ={sigma_j:g}neV", s))
    return Preset("fig1a", "coherence", _fit_window(out, points))


def fig1b(points: int = 200) -> Preset:
    """FID at J = 0, δh = 0.1 μeV: σ0J = 10 neV, A_J = 2 neV, σ0H ∈ {1, 0.1} neV."""
    charge = _charge(10 * NEV, 2 * NEV)
    out = []
    for sigma_h in (1.0, 0.1):
        magnetic = NoiseSpectrum(sigma_qs=sigma_h * NEV, amplitude=A_H)
        s = _scenario(f"fig1b sH={sigma_h:g}neV", 0.0, 0.1, charge, magnetic, PulseSequence.fid())
        out.extend(_both_modes(f"sH={sigma_h:g}neV", s))
    return Preset("fig1b", "coherence", _fit_window(out, points))


def fig2a(points: int = 25) -> Preset:
    """FID T2 against δh at J = 0.5 μeV, σ0J = 1 neV, σ0H = 0.1 μeV, A_H = 0."""
    sweep = SweepBlock(axis="dh", start=1e-3, stop=1.0, points=points)
    s = _scenario("fig2a", 0.5, 1e-3, _charge(1 * NEV), NoiseSpectrum(sigma_qs=0.1),
                  PulseSequence.fid(), sweep=sweep)
    return Preset("fig2a", "sweep", [("sJ=1neV", s)])


def fig2b(points: int = 25) -> Preset:
    """SE T2 against J at δh = 0.5 μeV, σ0H = 0.1 μeV, A_H = 0; three charge models."""
    magnetic = NoiseSpectrum(sigma_qs=0.1)
    out = []
    for sigma_j in (5.0, 1.0):
        sweep = SweepBlock(axis="J", start=1e-3, stop=1.0, points=points)
        s = _scenario(f"fig2b sJ={sigma_j:g}neV", 1e-3, 0.5, _charge(sigma_j * NEV), magnetic,
                      PulseSequence.spin_echo(), sweep=sweep)
        out.append((f"sJ={sigma_j:g}neV", s))
    sweep = SweepBlock(axis="J", start=1e-3, stop=1.0, points=points, charge_per_j=0.05,
                       charge_amplitude_ratio=CHARGE_AMPLITUDE_RATIO)
    s = _scenario("fig2b sJ=0.05J", 1e-3, 0.5, _charge(0.05e-3), magnetic, PulseSequence.spin_echo(), sweep=sweep)
    out.append(("sJ=0.05J", s))
    return Preset("fig2b", "sweep", out)


def fig3(points: int = 200) -> Preset:
    """SE at δh = 0.1 μeV, J = 0.02 μeV, σ0J = 5 neV, A_J = 1 neV; σ0H and A_H varied."""
    charge = _charge(5 * NEV, 1 * NEV)
    out = []
    for a_h in (0.0, A_H):
        for sigma_h in (0.01, 0.1):
            magnetic = NoiseSpectrum(sigma_qs=sigma_h, amplitude=a_h)
            label = f"sH={sigma_h:g} AH={a_h / PEV:g}peV"
            out.append((label, _scenario(f"fig3 {label}", 0.02, 0.1, charge, magnetic, PulseSequence.spin_echo())))
        magnetic = NoiseSpectrum(sigma_qs=0.1, amplitude=a_h)
        label = f"sH=0.1 AH={a_h / PEV:g}peV no-semilinked"
        out.append((label, _scenario(f"fig3 {label}", 0.02, 0.1, charge, magnetic,
                                     PulseSequence.spin_echo(), semilinked=False)))
    return Preset("fig3", "coherence", _fit_window(out, points))


_BUILDERS = {"fig1a": fig1a, "fig1b": fig1b, "fig2a": fig2a, "fig2b": fig2b, "fig3": fig3}


def build_preset(name: str, points: int | None = None) -> Preset:
    if name not in _BUILDERS:
        raise ValueError(f"unknown preset '{name}' (choose from {', '.join(PRESET_NAMES)})")
    builder = _BUILDERS[name]
    preset = builder() if points is None else builder(points)
    logger.info(f"Preset {name}: {len(preset.scenarios)} curve(s)")
    return preset
