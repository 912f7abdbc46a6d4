import logging
import os
import sys
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.core.config import read_json, validation_to_config_error, write_json
from app.core.units import Energy, Frequency, Time
from app.services.cumulant import EvalMode
from app.services.model import NoiseSpectrum, TwoAxisNoise, WorkingPoint
from app.services.oracle import McConfig
from app.services.sequences import PulseSequence

logger = logging.getLogger(__name__)

SequenceBlock = PulseSequence


def default_scenario_path() -> str:
    current_dir = os.path.dirname(os.path.abspath(__file__))
    project_root = os.path.dirname(os.path.dirname(current_dir))
    return os.path.join(project_root, "config", "scenario.json")


class WorkingPointBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    J: Energy = 0.0
    dh: Energy = 0.0

    @model_validator(mode="after")
    def _check(self):
        if self.J < 0 or self.dh < 0:
            raise ValueError("J and dh must be >= 0")
        if self.J == 0 and self.dh == 0:
            raise ValueError("J and dh cannot both be zero")
        return self

    def to_working_point(self) -> WorkingPoint:
        return WorkingPoint.from_exchange(self.J, self.dh)


class NoiseBlock(BaseModel):
    """Charge noise acts on J (z axis), magnetic noise on δh (x axis)."""
    model_config = ConfigDict(extra="forbid")

    charge: NoiseSpectrum = Field(default_factory=NoiseSpectrum)
    magnetic: NoiseSpectrum = Field(default_factory=NoiseSpectrum)

    def to_noise(self) -> TwoAxisNoise:
        return TwoAxisNoise(sz=self.charge, sx=self.magnetic)


class TimeBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t_max: Time
    t_min: Time = 0.0
    points: int = Field(default=200, ge=2)
    spacing: Literal["linear", "log"] = "linear"

    @model_validator(mode="after")
    def _check(self):
        if self.t_min < 0 or self.t_max <= self.t_min:
            raise ValueError("need 0 <= t_min < t_max")
        if self.spacing == "log" and self.t_min <= 0:
            raise ValueError("log spacing needs t_min > 0")
        return self

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.t_min, self.t_max, self.points)
        return np.linspace(self.t_min, self.t_max, self.points)


class CutoffBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Literal["inverse_time", "fixed"] = "inverse_time"
    omega1: Optional[Frequency] = None

    @model_validator(mode="after")
    def _check(self):
        if self.mode == "fixed" and (self.omega1 is None or self.omega1 <= 0):
            raise ValueError("fixed cutoff needs omega1 > 0")
        return self

    @property
    def fixed(self) -> float | None:
        return self.omega1 if self.mode == "fixed" else None


class McBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_traj: int = Field(default=10_000, ge=1)
    dt: Time = 0.05
    n_freq: int = Field(default=1024, ge=64)
    seed: int = Field(default=1234, ge=0)
    points: int = Field(default=40, ge=1)
    batch_size: int = Field(default=256, ge=1)

    def to_config(self, t_grid) -> McConfig:
        return McConfig(
            n_traj=self.n_traj,
            dt=self.dt,
            n_freq=self.n_freq,
            seed=self.seed,
            t_grid=tuple(float(t) for t in t_grid),
            batch_size=self.batch_size,
        )


class SweepBlock(BaseModel):
    """
    One swept parameter. `sigma_charge` and `sigma_magnetic` sweep the
    quasi-static deviation of that spectrum. With `charge_per_j` set, the charge
    spectrum follows J: σ0J = charge_per_j·J and A_J = charge_amplitude_ratio·σ0J.
    """
    model_config = ConfigDict(extra="forbid")

    axis: Literal["dh", "J", "sigma_charge", "sigma_magnetic"]
    start: Energy
    stop: Energy
    points: int = Field(default=25, ge=1)
    spacing: Literal["linear", "log"] = "log"
    charge_per_j: Optional[float] = Field(default=None, gt=0)
    charge_amplitude_ratio: float = Field(default=0.2, ge=0)

    @model_validator(mode="after")
    def _check(self):
        if self.start <= 0 and self.spacing == "log":
            raise ValueError("log sweep needs start > 0")
        if self.points > 1 and self.stop <= self.start:
            raise ValueError("sweep needs stop > start")
        return self

    def values(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.start])
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "scenario"
    working_point: WorkingPointBlock
    noise: NoiseBlock = NoiseBlock()
    sequence: SequenceBlock = PulseSequence()
    time: TimeBlock
    mode: EvalMode = EvalMode.RESUMMED
    semilinked: bool = True
    cutoff: CutoffBlock = CutoffBlock()
    mc: Optional[McBlock] = None
    sweep: Optional[SweepBlock] = None

    @property
    def wp(self) -> WorkingPoint:
        return self.working_point.to_working_point()

    @property
    def two_axis(self) -> TwoAxisNoise:
        return self.noise.to_noise()

    @property
    def omega1(self) -> float | None:
        return self.cutoff.fixed

    def t_grid(self) -> np.ndarray:
        return self.time.grid()

    def with_point(self, axis: str, value: float, sweep: SweepBlock | None = None) -> "Scenario":
        """Copy with one sweep parameter replaced."""
        wp = self.working_point
        charge = self.noise.charge
        magnetic = self.noise.magnetic
        if axis == "dh":
            wp = WorkingPointBlock(J=wp.J, dh=value)
        elif axis == "J":
            wp = WorkingPointBlock(J=value, dh=wp.dh)
        elif axis == "sigma_charge":
            charge = charge.model_copy(update={"sigma_qs": value})
        elif axis == "sigma_magnetic":
            magnetic = magnetic.model_copy(update={"sigma_qs": value})
        else:
            raise ValueError(f"unknown sweep axis '{axis}'")
        if sweep is not None and sweep.charge_per_j is not None:
            sigma = sweep.charge_per_j * wp.J
            charge = charge.model_copy(
                update={"sigma_qs": sigma, "amplitude": sweep.charge_amplitude_ratio * sigma}
            )
        return self.model_copy(update={
            "working_point": wp,
            "noise": NoiseBlock(charge=charge, magnetic=magnetic),
        })


def load_scenario(path: str = None) -> Scenario:
    """Load and validate a scenario file; errors carry the offending line."""
    if path is None:
        path = default_scenario_path()
    data, text = read_json(path)
    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as e:
        raise validation_to_config_error(e, path, text) from e
    logger.debug(f"Loaded scenario '{scenario.name}' from {path}")
    return scenario


def scenario_to_dict(scenario: Scenario) -> dict:
    return scenario.model_dump(mode="json")


def save_scenario(scenario: Scenario, path: str = None):
    """Write the fully resolved scenario (natural units)."""
    if path is None:
        path = default_scenario_path()
    write_json(scenario_to_dict(scenario), path)


def write_default_scenario(path: str = None) -> str:
    if path is None:
        path = default_scenario_path()
    default = {
        "name": "fid-exchange",
        "working_point": {"J": "0.5 ueV", "dh": 0.0},
        "noise": {
            "charge": {"amplitude": "0.2 neV", "alpha": 1.0, "sigma_qs": "1 neV"},
            "magnetic": {"amplitude": "66 peV", "alpha": 1.0, "sigma_qs": "0.1 ueV"},
        },
        "sequence": {"kind": "fid"},
        "time": {"t_max": "1 us", "points": 200},
        "mode": "resummed",
        "cutoff": {"mode": "inverse_time"},
    }
    write_json(default, path)

    print(f"\n{'='*60}", file=sys.stderr)
    print(f" NOTICE: Scenario file was missing.", file=sys.stderr)
    print(f" Created default scenario file at:", file=sys.stderr)
    print(f" {path}", file=sys.stderr)
    print(f" Edit the working point, noise and time blocks before running.", file=sys.stderr)
    print(f"{'='*60}\n", file=sys.stderr)
    return path
