"""
Pulse sequences, switching functions and filter functions.

Pulses are instantaneous π rotations about y. A sequence is stored as pulse
positions in fractions of the total time, so a single object covers a whole
t-sweep. The filter function is

    f̃_t(ω) = ∫_0^t f_t(t') e^{iωt'} dt'

assembled from the constant-sign segments of the switching function.
"""
import logging
import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.services.model import WorkingPoint

logger = logging.getLogger(__name__)

# below this |ω|·t the segment exponentials are replaced by their Taylor series
SMALL_PHASE = 1e-6


class SequenceKind(str, Enum):
    FID = "fid"
    CPMG = "cpmg"
    CUSTOM = "custom"


class PulseSequence(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SequenceKind = SequenceKind.FID
    n: int = Field(default=1, ge=1)
    fractions: tuple[float, ...] = ()

    @model_validator(mode="after")
    def _check(self):
        if self.kind is SequenceKind.CUSTOM:
            fr = self.fractions
            if any(not (0.0 < f < 1.0) for f in fr):
                raise ValueError("custom pulse fractions must lie strictly inside (0, 1)")
            if any(b <= a for a, b in zip(fr, fr[1:])):
                raise ValueError("custom pulse fractions must be strictly increasing")
        elif self.fractions:
            raise ValueError("fractions are only accepted for kind='custom'")
        return self

    @classmethod
    def fid(cls) -> "PulseSequence":
        return cls(kind=SequenceKind.FID)

    @classmethod
    def spin_echo(cls) -> "PulseSequence":
        return cls(kind=SequenceKind.CPMG, n=1)

    @classmethod
    def cpmg(cls, n: int) -> "PulseSequence":
        return cls(kind=SequenceKind.CPMG, n=n)

    @classmethod
    def custom(cls, fractions) -> "PulseSequence":
        return cls(kind=SequenceKind.CUSTOM, fractions=tuple(float(f) for f in fractions))

    @property
    def label(self) -> str:
        if self.kind is SequenceKind.FID:
            return "FID"
        if self.kind is SequenceKind.CPMG:
            return "SE" if self.n == 1 else f"CPMG{self.n}"
        return "custom(" + ",".join(f"{f:g}" for f in self.fractions) + ")"

    @property
    def pulse_fractions(self) -> np.ndarray:
        if self.kind is SequenceKind.FID:
            return np.zeros(0)
        if self.kind is SequenceKind.CPMG:
            return (np.arange(1, self.n + 1) - 0.5) / self.n
        return np.asarray(self.fractions, dtype=float)

    @property
    def n_pulses(self) -> int:
        return len(self.pulse_fractions)

    @property
    def segment_edges(self) -> np.ndarray:
        """Edges 0 = u_0 < u_1 < ... < u_m = 1 of the constant-sign segments."""
        return np.concatenate(([0.0], self.pulse_fractions, [1.0]))

    @property
    def segment_signs(self) -> np.ndarray:
        return np.where(np.arange(len(self.segment_edges) - 1) % 2 == 0, 1.0, -1.0)

    @property
    def edge_weights(self) -> np.ndarray:
        """
        Coefficients c_p with iω·f̃_t(ω) = Σ_p c_p e^{iω u_p t}: −1 at the start,
        ±2 at every pulse, ±1 at the end.
        """
        s = self.segment_signs
        c = np.zeros(len(self.segment_edges))
        c[:-1] -= s
        c[1:] += s
        return c

    @property
    def net_area(self) -> float:
        """∫_0^1 f du in units of t."""
        return float(np.sum(self.segment_signs * np.diff(self.segment_edges)))

    @property
    def is_balanced(self) -> bool:
        return abs(self.net_area) < 1e-12


def pulse_times(seq: PulseSequence, t: float) -> np.ndarray:
    """Pulse instants for total time t; CPMG(n): t_k = (k − 1/2)·t/n."""
    return seq.pulse_fractions * t


def switching(seq: PulseSequence, t: float, t_prime: float) -> int:
    """f_t(t') = (−1)^{#pulses before t'}."""
    if not (0.0 <= t_prime <= t):
        raise ValueError(f"t'={t_prime} outside [0, {t}]")
    flips = int(np.searchsorted(pulse_times(seq, t), t_prime, side="left"))
    return -1 if flips % 2 else 1


def filter_fn(seq: PulseSequence, t: float, omega):
    """Complex filter function f̃_t(ω); ω = 0 handled by its analytic limit."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    edges = seq.segment_edges * t
    a, b = edges[:-1], edges[1:]
    signs = seq.segment_signs

    out = np.empty(w.shape, dtype=complex)
    small = np.abs(w) * t < SMALL_PHASE
    if np.any(~small):
        wl = w[~small][:, None]
        seg = (np.exp(1j * wl * b) - np.exp(1j * wl * a)) / (1j * wl)
        out[~small] = seg @ signs
    if np.any(small):
        ws = w[small][:, None]
        # (e^{iωb} − e^{iωa})/(iω) to third order
        seg = (b - a) + 0.5j * ws * (b ** 2 - a ** 2) - ws ** 2 * (b ** 3 - a ** 3) / 6.0
        out[small] = seg @ signs
    if np.ndim(omega) == 0:
        return complex(out[0])
    return out


def filter_sym(seq: PulseSequence, t: float, omega):
    """Filter function with time measured from t/2: e^{−iωt/2}·f̃_t(ω)."""
    return np.exp(-0.5j * np.asarray(omega, dtype=float) * t) * filter_fn(seq, t, omega)


def filter_abs2(seq: PulseSequence, t: float, omega):
    f = filter_fn(seq, t, omega)
    return np.abs(f) ** 2 if np.ndim(f) else abs(f) ** 2


def filter_at_zero(seq: PulseSequence, t: float) -> float:
    """f̃_t(0) = ∫ f dt' (real)."""
    return seq.net_area * t


def mean_phase(seq: PulseSequence, wp: WorkingPoint, t: float) -> float:
    """φ̄(t) = ½·B·∫_0^t f_t dt' (B·t/2 for FID, 0 when balanced)."""
    if seq.is_balanced:
        return 0.0
    return 0.5 * wp.magnitude * seq.net_area * t


def lobe_width(t: float) -> float:
    """Spacing of the FID filter zeros, 2π/t."""
    return 2.0 * math.pi / t
