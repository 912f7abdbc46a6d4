import numpy as np
import pytest

from app.core.config import settings
from app.core.units import hz_to_natural
from app.services.cumulant import EvalMode
from app.services.presets import A_H, NEV, PRESET_NAMES, build_preset
from app.services.runner import CoherenceRunner
from app.services.scenario import McBlock, TimeBlock
from app.services.sequences import SequenceKind


@pytest.mark.parametrize("name,count", [("fig1a", 4), ("fig1b", 4), ("fig2a", 1), ("fig2b", 3), ("fig3", 6)])
def test_curve_counts(name, count):
    preset = build_preset(name, 5)
    assert preset.name == name
    assert len(preset.scenarios) == count


def test_unknown_preset():
    with pytest.raises(ValueError):
        build_preset("fig9")
    assert set(PRESET_NAMES) == {"fig1a", "fig1b", "fig2a", "fig2b", "fig3"}


def test_coherence_presets_share_one_window():
    preset = build_preset("fig3", 7)
    windows = {s.time.t_max for _, s in preset.scenarios}
    assert len(windows) == 1
    assert all(len(s.t_grid()) == 7 for _, s in preset.scenarios)
    assert all(s.sequence.kind is SequenceKind.CPMG for _, s in preset.scenarios)


def test_fig1_presets_carry_both_modes():
    for name in ("fig1a", "fig1b"):
        modes = [s.mode for _, s in build_preset(name, 5).scenarios]
        assert modes.count(EvalMode.FIRST_ORDER) == 2
        assert modes.count(EvalMode.RESUMMED) == 2


def test_fig2b_tied_charge_sweep():
    preset = build_preset("fig2b", 4)
    assert preset.kind == "sweep"
    label, scenario = preset.scenarios[-1]
    assert label == "sJ=0.05J"
    point = scenario.with_point("J", 0.4, scenario.sweep)
    assert point.noise.charge.sigma_qs == pytest.approx(0.02)
    assert point.noise.charge.amplitude == pytest.approx(0.004)


def _fig3(label):
    return dict(build_preset("fig3", 5).scenarios)[label]


@pytest.mark.slow
def test_fig3_quasi_static_reductions():
    runner = CoherenceRunner()
    t2 = {
        label: runner.t2(_fig3(label)).t2
        for label in (
            "sH=0.01 AH=0peV", "sH=0.1 AH=0peV", "sH=0.1 AH=0peV no-semilinked",
            "sH=0.01 AH=66peV", "sH=0.1 AH=66peV",
        )
    }
    assert all(value is not None for value in t2.values())
    quiet = 1.0 - t2["sH=0.1 AH=0peV"] / t2["sH=0.01 AH=0peV"]
    dynamic = 1.0 - t2["sH=0.1 AH=66peV"] / t2["sH=0.01 AH=66peV"]
    assert t2["sH=0.01 AH=0peV"] == pytest.approx(14191.0, rel=0.01)
    assert t2["sH=0.1 AH=0peV"] == pytest.approx(10527.0, rel=0.01)
    assert quiet == pytest.approx(0.258, abs=0.01)
    assert dynamic == pytest.approx(0.245, abs=0.01)
    assert t2["sH=0.1 AH=66peV"] < t2["sH=0.1 AH=0peV"]
    assert t2["sH=0.1 AH=0peV no-semilinked"] > t2["sH=0.1 AH=0peV"]


@pytest.mark.slow
def test_echo_t2_saturates_at_small_exchange():
    label, scenario = build_preset("fig2b", 5).scenarios[0]
    assert label == "sJ=5neV"
    runner = CoherenceRunner()
    low = runner.t2(scenario.with_point("J", 1e-4)).t2
    high = runner.t2(scenario.with_point("J", 2e-4)).t2
    assert low is not None and high is not None
    assert high == pytest.approx(low, rel=0.02)
    # B·T2J/σ0J with T2J ≈ 3/A_J, A_J = 1 neV, σ0J = 5 neV. The linked factor
    # (1 + x)^{-1/2} crosses 1/e at x = e² − 1, which lands √((e²−1)/2) above it
    scale = 0.5 * (3.0 / (1 * NEV)) / (5 * NEV)
    assert low / scale == pytest.approx(1.76, rel=0.02)


@pytest.mark.slow
@pytest.mark.parametrize("name,label,t_max,dt", [
    ("fig1a", "sJ=1neV resummed", 500.0, 0.04),
    ("fig1b", "sH=1neV resummed", 2000.0, 0.25),
])
def test_monte_carlo_agrees_with_fig1(name, label, t_max, dt):
    scenario = dict(build_preset(name, 5).scenarios)[label]
    assert scenario.noise.magnetic.amplitude == pytest.approx(A_H)
    scenario = scenario.model_copy(update={
        "time": TimeBlock(t_max=t_max, points=9),
        "mc": McBlock(n_traj=10_000, dt=dt, n_freq=256, seed=17, points=9, batch_size=500),
    })
    curve = CoherenceRunner().run_mc(label, scenario, 0.02)
    assert curve.breaches == []
    assert np.all(curve.mc.W[1:] < 1.0)


def test_presets_follow_cutoff_settings(monkeypatch):
    monkeypatch.setattr(settings, "omega_low_hz", 100.0)
    for _, scenario in build_preset("fig1a", 5).scenarios:
        assert scenario.noise.charge.omega_low == pytest.approx(hz_to_natural(100.0))
        assert scenario.noise.magnetic.omega_low == pytest.approx(hz_to_natural(100.0))
