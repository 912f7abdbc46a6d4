"""
Resummed cumulant expansion of the coherence function.

The averaged rotation-angle factor factorizes into the first-order decay
factors c_z·c_x, the linked and semi-linked even sums (amplitude decay) and the
odd sums (a phase shift, present only for free induction decay). W(t) is the
modulus of e^{−2iφ̄}⟨e^{−2iδφ}⟩ corrected by the tilt-angle fluctuation term.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from app.core.errors import DephasingError
from app.services.model import AxisCombination, TwoAxisNoise, WorkingPoint, parallel_perpendicular, project_variances
from app.services.sequences import PulseSequence, SequenceKind, filter_at_zero, mean_phase
from app.services.spectral import chi_decay_factors, combined_hf, resolve_cutoff

logger = logging.getLogger(__name__)

INV_E = math.exp(-1.0)
# 1/e crossing of (1 + x²)^{-1/4}
FID_TRANSVERSE_ROOT = math.sqrt(math.exp(4.0) - 1.0)
# ∫_0^∞ 16 sin⁴(u/4)/u³ du = ln 2, so the echo decays as exp(−ln2·A²t²/2π) under 1/f noise
ECHO_LONGITUDINAL_ROOT = math.sqrt(2.0 * math.pi / math.log(2.0))


class EvalMode(str, Enum):
    FIRST_ORDER = "first_order"
    RESUMMED = "resummed"


@dataclass(frozen=True)
class CoherencePoint:
    t: float
    W: float
    phase: float
    c_z: float = 1.0
    c_x: float = 1.0
    even_linked: float = 1.0
    even_semilinked_exponent: float = 0.0
    odd_phase: float = 0.0
    odd_semilinked_phase: float = 0.0
    axis_term: complex = 0j
    mean_phase: float = 0.0
    partial: bool = False

    @property
    def rotation_factor(self) -> complex:
        """⟨e^{−2iδφ}⟩ rebuilt from the stored parts."""
        decay = self.c_z * self.c_x * self.even_linked * math.exp(-self.even_semilinked_exponent)
        return decay * cmath.exp(-1j * (self.odd_phase + self.odd_semilinked_phase))

    def recombine(self) -> float:
        return abs(_rotated(self.rotation_factor, self.axis_term, self.mean_phase))


@dataclass(frozen=True)
class T2Estimate:
    t2: float | None
    reached: bool


@dataclass(frozen=True)
class T2Estimates:
    """Closed-form dephasing-time estimates used to size t windows."""
    longitudinal: float | None
    transverse: float | None

    def shortest(self) -> float | None:
        values = [v for v in (self.longitudinal, self.transverse) if v is not None]
        return min(values) if values else None


def _rotated(rotation: complex, axis_term: complex, phi_bar: float) -> complex:
    """ζ = e^{2iφ̄}·(e^{−2iφ̄}R + axis), so that W = |ζ| and the phase is 2φ̄ − arg ζ."""
    if axis_term == 0:
        return rotation
    return rotation + axis_term * cmath.exp(2j * phi_bar)


@dataclass(frozen=True)
class _Terms:
    """Everything the closed forms need at one (t, working point, sequence)."""
    t: float
    b: float
    chi: float
    bx: float
    bz: float
    sigma: AxisCombination
    hf: AxisCombination | None
    f0: float
    fid: bool
    balanced: bool


def _terms(noise: TwoAxisNoise, wp: WorkingPoint, seq: PulseSequence, t: float,
           omega1: float | None, with_hf: bool = True) -> _Terms:
    cutoff = resolve_cutoff(t, omega1)
    fid = seq.kind is SequenceKind.FID
    hf = combined_hf(noise, wp, seq, t, omega1) if (with_hf and not fid) else None
    return _Terms(
        t=t,
        b=wp.magnitude,
        chi=wp.chi,
        bx=wp.bx,
        bz=wp.bz,
        sigma=project_variances(noise, wp, cutoff),
        hf=hf,
        f0=filter_at_zero(seq, t),
        fid=fid,
        balanced=seq.is_balanced,
    )


def _eta_argument(p: _Terms) -> float:
    if p.fid:
        return p.sigma.bar_plus ** 2 * p.t ** 2 / p.b ** 2
    return p.sigma.bar_plus * p.hf.bar_plus / p.b ** 2


def _eta(p: _Terms) -> float:
    return 1.0 / (1.0 + _eta_argument(p))


def _even_linked(p: _Terms, mode: EvalMode) -> float:
    x = _eta_argument(p)
    power = 0.25 if p.fid else 0.5
    if mode is EvalMode.FIRST_ORDER:
        return math.exp(-power * x)
    return (1.0 + x) ** -power


def _even_semilinked(p: _Terms) -> float:
    mixing = (p.bx * p.bz / p.b ** 3) ** 2
    if mixing == 0.0:
        return 0.0
    s_minus4 = p.sigma.minus ** 2
    if p.fid:
        return 0.5 * _eta(p) * mixing * s_minus4 * p.sigma.bar_plus * p.t ** 4
    return 0.5 * _eta(p) * mixing * (
        p.f0 ** 2 * p.hf.bar_plus * s_minus4 + p.hf.minus ** 2 * p.sigma.bar_plus
    )


def _odd_sums(p: _Terms, mode: EvalMode) -> tuple[float, float]:
    if not p.fid:
        return 0.0, 0.0
    s = p.sigma.bar_plus * p.t / p.b
    if mode is EvalMode.FIRST_ORDER:
        return 0.5 * s, 0.0
    linked = 0.5 * math.atan(s)
    semi = -(math.sin(2.0 * p.chi) ** 2 / (8.0 * p.b)) * _eta(p) * p.sigma.minus ** 2 * p.t ** 3
    return linked, semi


def eta(noise: TwoAxisNoise, wp: WorkingPoint, seq: PulseSequence, t: float,
        omega1: float | None = None) -> float:
    """η = 1/(1 + σ̄0+²S̄+^hf/B²) for pulse sequences, 1/(1 + σ̄0+⁴t²/B²) for FID."""
    return _eta(_terms(noise, wp, seq, t, omega1))


def even_linked(noise: TwoAxisNoise, wp: WorkingPoint, seq: PulseSequence, t: float,
                omega1: float | None = None, mode: EvalMode = EvalMode.RESUMMED) -> float:
    """e^{−Σ2k}: √η for pulse sequences, η_FID^{1/4} for FID."""
    return _even_linked(_terms(noise, wp, seq, t, omega1), mode)


def even_semilinked(noise: TwoAxisNoise, wp: WorkingPoint, seq: PulseSequence, t: float,
                    omega1: float | None = None) -> float:
    """Σ̃2k, applied as e^{−Σ̃2k}."""
    return _even_semilinked(_terms(noise, wp, seq, t, omega1))


def odd_sums_fid(noise: TwoAxisNoise, wp: WorkingPoint, t: float, omega1: float | None = None,
                 seq: PulseSequence | None = None, mode: EvalMode = EvalMode.RESUMMED) -> tuple[float, float]:
    """(Σ2k+1, Σ̃2k+1); both vanish for any sequence other than FID."""
    seq = seq or PulseSequence.fid()
    if seq.kind is not SequenceKind.FID or t == 0:
        return 0.0, 0.0
    return _odd_sums(_terms(noise, wp, seq, t, omega1, with_hf=False), mode)


def _rotation(p: _Terms, c_z: float, c_x: float, mode: EvalMode, semilinked: bool) -> tuple[complex, dict]:
    linked = _even_linked(p, mode)
    use_semi = semilinked and mode is EvalMode.RESUMMED
    semi = _even_semilinked(p) if use_semi else 0.0
    odd, odd_semi = _odd_sums(p, mode)
    if not use_semi:
        odd_semi = 0.0
    parts = dict(
        c_z=c_z,
        c_x=c_x,
        even_linked=linked,
        even_semilinked_exponent=semi,
        odd_phase=odd,
        odd_semilinked_phase=odd_semi,
    )
    value = c_z * c_x * linked * math.exp(-semi) * cmath.exp(-1j * (odd + odd_semi))
    return value, parts


def rotation_angle_factor(noise: TwoAxisNoise, wp: WorkingPoint, seq: PulseSequence, t: float,
                          mode: EvalMode = EvalMode.RESUMMED, semilinked: bool = True,
                          omega1: float | None = None) -> complex:
    """⟨e^{−2iδφ}⟩ = c_z c_x e^{−(Σ2k + Σ̃2k)} e^{−i(Σ2k+1 + Σ̃2k+1)}."""
    if t == 0:
        return 1 + 0j
    p = _terms(noise, wp, seq, t, omega1)
    c_z, c_x = chi_decay_factors(noise, wp, seq, t)
    return _rotation(p, c_z, c_x, mode, semilinked)[0]


def _axis_term(p: _Terms, rotation: complex, phi_bar: float, mode: EvalMode) -> complex:
    # balanced sequences cancel the leading order; first_order drops the term
    if p.balanced or mode is EvalMode.FIRST_ORDER:
        return 0j
    # σ̄0+² is the variance of the noise component perpendicular to B
    eps = p.sigma.bar_plus / p.b ** 2
    if eps == 0.0:
        return 0j
    phi = cmath.exp(-2j * phi_bar) * rotation
    if p.fid:
        # δχ² and the quadratic phase come from the same transverse component:
        # ⟨ξ⊥² e^{−iaξ⊥²}⟩ = σ²·⟨e^{−iaξ⊥²}⟩/(1 + 2iaσ²) for Gaussian ξ⊥
        phi /= 1.0 + 1j * p.sigma.bar_plus * p.t / p.b
    return eps * (1.0 - 0.5 * (phi.real + phi))


def axis_error_term(noise: TwoAxisNoise, wp: WorkingPoint, seq: PulseSequence, t: float,
                    mode: EvalMode = EvalMode.RESUMMED, semilinked: bool = True,
                    omega1: float | None = None) -> complex:
    """
    Tilt-angle fluctuation correction added to e^{−2iφ̄}⟨e^{−2iδφ}⟩.

    Uses the factorized average ⟨δχ²⟩·⟨1 − ½(cos2φ + e^{−2iφ})⟩ with
    ⟨δχ²⟩ = σ̄0+²/B². For FID the phase average carries the Gaussian
    correlation between δχ² and the quadratic transverse phase. Zero at
    t = 0, for balanced sequences and without transverse noise.
    """
    if t == 0:
        return 0j
    p = _terms(noise, wp, seq, t, omega1)
    c_z, c_x = chi_decay_factors(noise, wp, seq, t)
    rotation = _rotation(p, c_z, c_x, mode, semilinked)[0]
    return _axis_term(p, rotation, mean_phase(seq, wp, t), mode)


def coherence(noise: TwoAxisNoise, wp: WorkingPoint, seq: PulseSequence, t: float,
              mode: EvalMode = EvalMode.RESUMMED, semilinked: bool = True,
              omega1: float | None = None) -> CoherencePoint:
    """W(t) together with every factor that builds it."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    phi_bar = mean_phase(seq, wp, t)
    if t == 0:
        return CoherencePoint(t=0.0, W=1.0, phase=0.0)

    p = _terms(noise, wp, seq, t, omega1)
    c_z, c_x = chi_decay_factors(noise, wp, seq, t)
    rotation, parts = _rotation(p, c_z, c_x, mode, semilinked)
    axis = _axis_term(p, rotation, phi_bar, mode)

    zeta = _rotated(rotation, axis, phi_bar)
    partial = seq.kind is SequenceKind.CUSTOM and not p.balanced
    if partial:
        logger.debug(f"{seq.label}: unbalanced custom sequence, odd sums not available")
    return CoherencePoint(
        t=t,
        W=abs(zeta),
        phase=2.0 * phi_bar - cmath.phase(zeta),
        axis_term=axis,
        mean_phase=phi_bar,
        partial=partial,
        **parts,
    )


def coherence_curve(noise: TwoAxisNoise, wp: WorkingPoint, seq: PulseSequence, t_grid: Iterable[float],
                    mode: EvalMode = EvalMode.RESUMMED, semilinked: bool = True,
                    omega1: float | None = None) -> list[CoherencePoint]:
    return [coherence(noise, wp, seq, float(t), mode, semilinked, omega1) for t in t_grid]


def t2_extract(curve: Sequence[CoherencePoint], threshold: float = INV_E) -> T2Estimate:
    """First 1/e crossing, interpolated linearly in ln W; never extrapolated."""
    if not curve:
        return T2Estimate(None, False)
    bad = next((p for p in curve if not math.isfinite(p.W)), None)
    if bad is not None:
        raise DephasingError(f"non-finite W={bad.W} at t={bad.t:.6g}")
    if curve[0].W < threshold:
        logger.warning(f"curve starts below threshold at t={curve[0].t:.6g}")
        return T2Estimate(curve[0].t, True)

    for prev, cur in zip(curve, curve[1:]):
        if cur.W >= threshold:
            continue
        if cur.W <= 0.0:
            frac = (prev.W - threshold) / (prev.W - cur.W)
        else:
            lp, lc = math.log(prev.W), math.log(cur.W)
            frac = (lp - math.log(threshold)) / (lp - lc)
        return T2Estimate(prev.t + frac * (cur.t - prev.t), True)
    return T2Estimate(None, False)


def t2_estimates(noise: TwoAxisNoise, wp: WorkingPoint, seq: PulseSequence,
                 omega1: float | None = None) -> T2Estimates:
    """
    Closed-form estimates: √2/σ∥ and √(e⁴−1)·B/σ̄0+² for FID, √(2π/ln2)/A∥ for
    pulse sequences under 1/f noise. For FID the low-frequency variances depend
    on t through ω1, so the estimate is iterated to a fixed point.
    """
    c2 = math.cos(wp.chi) ** 2
    s2 = math.sin(wp.chi) ** 2
    b = wp.magnitude

    if seq.kind is not SequenceKind.FID:
        amp2 = c2 * noise.sz.amplitude ** 2 + s2 * noise.sx.amplitude ** 2
        longitudinal = ECHO_LONGITUDINAL_ROOT / math.sqrt(amp2) if amp2 > 0 else None
        return T2Estimates(longitudinal=longitudinal, transverse=None)

    def fixed_point(formula) -> float | None:
        t = None
        guess = 1.0
        for _ in range(8):
            par, perp = parallel_perpendicular(noise, wp, resolve_cutoff(guess, omega1))
            t = formula(par, perp)
            if t is None:
                return None
            if abs(t - guess) <= 1e-6 * t:
                break
            guess = t
        return t

    longitudinal = fixed_point(lambda par, perp: math.sqrt(2.0 / par) if par > 0 else None)
    transverse = fixed_point(lambda par, perp: FID_TRANSVERSE_ROOT * b / perp if perp > 0 else None)
    return T2Estimates(longitudinal=longitudinal, transverse=transverse)
