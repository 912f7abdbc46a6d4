"""
Noise spectra, working point and the variance/projection algebra.

All energies are in μeV with ħ = 1 (see app.core.units). A spectrum is the one-sided
power law S̃(ω) = A²/ω^α supported on [ω0, ωuv] plus an optional quasi-static part
π·σ_qs²·δ(ω), normalised so that a band variance is ∫ dω/π S̃(ω).
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import settings
from app.core.units import Energy, Frequency, hz_to_natural, rad_per_ns_to_natural

logger = logging.getLogger(__name__)

# relative slack when checking cutoff ordering against float round-off
_CUTOFF_SLACK = 1e-12


class NoiseSpectrum(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    amplitude: Energy = 0.0
    alpha: float = Field(default=1.0, ge=0.0)
    omega_low: Frequency = Field(default_factory=lambda: hz_to_natural(settings.omega_low_hz))
    omega_uv: Frequency = Field(default_factory=lambda: rad_per_ns_to_natural(settings.omega_uv_rad_ns))
    sigma_qs: Energy = 0.0

    @model_validator(mode="after")
    def _check(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if self.sigma_qs < 0:
            raise ValueError("sigma_qs must be >= 0")
        if not self.omega_low > 0:
            raise ValueError("omega_low must be > 0")
        if not self.omega_uv > self.omega_low:
            raise ValueError("omega_uv must exceed omega_low")
        return self


class WorkingPoint(BaseModel):
    """Static control fields B = (Bx, 0, Bz)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    bx: Energy = 0.0
    bz: Energy = 0.0

    @model_validator(mode="after")
    def _check(self):
        if self.bx < 0 or self.bz < 0:
            raise ValueError("bx and bz must be >= 0")
        if math.hypot(self.bx, self.bz) <= 0:
            raise ValueError("working point needs a nonzero field (bx, bz)")
        return self

    @classmethod
    def from_exchange(cls, j: float, dh: float) -> "WorkingPoint":
        """Singlet-triplet mapping B = (δh, 0, J)."""
        return cls(bx=dh, bz=j)

    @property
    def magnitude(self) -> float:
        return math.hypot(self.bx, self.bz)

    @property
    def chi(self) -> float:
        # atan2 keeps bz = 0 exact (χ̄ = π/2)
        return math.atan2(self.bx, self.bz)


class TwoAxisNoise(BaseModel):
    """Independent noises on the z (exchange) and x (gradient) control fields."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    sz: NoiseSpectrum = Field(default_factory=NoiseSpectrum)
    sx: NoiseSpectrum = Field(default_factory=NoiseSpectrum)

    def swapped(self) -> "TwoAxisNoise":
        return TwoAxisNoise(sz=self.sx, sx=self.sz)


@dataclass(frozen=True)
class AxisCombination:
    """A z/x pair together with its plain and χ̄-weighted sums and differences."""
    z: float
    x: float
    plus: float
    minus: float
    bar_plus: float
    bar_minus: float

    @classmethod
    def of(cls, z: float, x: float, chi: float) -> "AxisCombination":
        s2 = math.sin(chi) ** 2
        c2 = math.cos(chi) ** 2
        return cls(
            z=z,
            x=x,
            plus=z + x,
            minus=z - x,
            bar_plus=s2 * z + c2 * x,
            bar_minus=s2 * z - c2 * x,
        )


def psd_eval(spec: NoiseSpectrum, omega):
    """S̃(ω) = A²/ω^α inside [ω0, ωuv], zero outside. Accepts scalars or arrays."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("psd_eval needs omega > 0; the quasi-static part is never sampled")
    inside = (w >= spec.omega_low) & (w <= spec.omega_uv)
    value = np.where(inside, spec.amplitude ** 2 / np.power(w, spec.alpha), 0.0)
    if value.ndim == 0:
        return float(value)
    return value


def power_band(spec: NoiseSpectrum, lo: float, hi: float) -> float:
    """∫_lo^hi dω/π A²/ω^α over the part of [lo, hi] inside the support."""
    a = max(lo, spec.omega_low)
    b = min(hi, spec.omega_uv)
    if b <= a or spec.amplitude == 0.0:
        return 0.0
    pref = spec.amplitude ** 2 / math.pi
    if abs(spec.alpha - 1.0) < 1e-12:
        return pref * math.log(b / a)
    p = 1.0 - spec.alpha
    # log-space form keeps precision when b/a is huge
    return pref * a ** p * math.expm1(p * math.log(b / a)) / p


def _check_cutoff(spec: NoiseSpectrum, omega1: float):
    lo = spec.omega_low * (1 - _CUTOFF_SLACK)
    hi = spec.omega_uv * (1 + _CUTOFF_SLACK)
    if not (lo <= omega1 <= hi):
        raise ValueError(
            f"cutoff omega1={omega1:.6g} outside [{spec.omega_low:.6g}, {spec.omega_uv:.6g}]"
        )


def effective_cutoff(spec: NoiseSpectrum, omega1: float) -> float:
    """Clamp a requested split frequency into the spectrum's support."""
    clamped = min(max(omega1, spec.omega_low), spec.omega_uv)
    if clamped != omega1:
        logger.debug(f"cutoff {omega1:.6g} clamped to {clamped:.6g}")
    return clamped


def sigma0_sq(spec: NoiseSpectrum, omega1: float) -> float:
    """Low-frequency variance σ0² = ∫_{ω0}^{ω1} dω/π S̃ + σ_qs²."""
    _check_cutoff(spec, omega1)
    return power_band(spec, spec.omega_low, omega1) + spec.sigma_qs ** 2


def sigma_hf_sq(spec: NoiseSpectrum, omega1: float) -> float:
    """High-frequency variance σ_t² = ∫_{ω1}^{ωuv} dω/π S̃."""
    _check_cutoff(spec, omega1)
    return power_band(spec, omega1, spec.omega_uv)


def total_variance(spec: NoiseSpectrum) -> float:
    return power_band(spec, spec.omega_low, spec.omega_uv) + spec.sigma_qs ** 2


def project_variances(noise: TwoAxisNoise, wp: WorkingPoint, omega1: float) -> AxisCombination:
    """σ0z², σ0x², σ0±² and σ̄0±² at split frequency ω1 (clamped per spectrum)."""
    z = sigma0_sq(noise.sz, effective_cutoff(noise.sz, omega1))
    x = sigma0_sq(noise.sx, effective_cutoff(noise.sx, omega1))
    return AxisCombination.of(z, x, wp.chi)


def parallel_perpendicular(noise: TwoAxisNoise, wp: WorkingPoint, omega1: float) -> tuple[float, float]:
    """Variances of ξ∥ = ξx sinχ̄ + ξz cosχ̄ and ξ⊥ = ξx cosχ̄ − ξz sinχ̄."""
    v = project_variances(noise, wp, omega1)
    c2 = math.cos(wp.chi) ** 2
    s2 = math.sin(wp.chi) ** 2
    return c2 * v.z + s2 * v.x, v.bar_plus
