"""
Frequency-domain overlap integrals ∫ |f̃_t(ω)|² S̃(ω) dω.

The integrand oscillates with period 2π/t in ω. The range is split into a
handful of log-spaced pieces below the first filter zero, then into lobes of
width 2π/t. All pieces are mapped onto [0, 1] and summed inside one scalar
integrand, so scipy's adaptive Gauss-Kronrod rule refines every lobe at once.

Past `tail_lobes·(n_pulses + 1)` lobes the filter is expanded through its edge
weights, |f̃|² = Σ_pq c_p c_q cos(ω(τ_p − τ_q))/ω². The diagonal part is closed
form and each distinct lag is a Fourier integral handled by QUADPACK's QAWF.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from app.core.config import settings
from app.core.errors import QuadratureError
from app.services.model import (
    AxisCombination,
    NoiseSpectrum,
    TwoAxisNoise,
    WorkingPoint,
    effective_cutoff,
    psd_eval,
)
from app.services.sequences import PulseSequence, filter_abs2, filter_at_zero, lobe_width

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OverlapResult:
    value: float
    est_error: float
    n_evals: int

    def __add__(self, other: "OverlapResult") -> "OverlapResult":
        return OverlapResult(
            self.value + other.value,
            self.est_error + other.est_error,
            self.n_evals + other.n_evals,
        )

    def scaled(self, factor: float) -> "OverlapResult":
        return OverlapResult(self.value * factor, self.est_error * abs(factor), self.n_evals)


ZERO = OverlapResult(0.0, 0.0, 0)


def resolve_cutoff(t: float, fixed: float | None = None) -> float:
    """Split frequency ω1: 1/t unless a fixed cutoff is configured."""
    if fixed is not None:
        return fixed
    return 1.0 / t


def _piece_edges(lo: float, hi: float, t: float, n_lobes: int) -> tuple[np.ndarray, float]:
    """
    Breakpoints of the lobe-resolved region starting at `lo`, capped at `hi`.
    Returns the edges and the frequency where the lobe region stops.
    """
    w = lobe_width(t)
    points = [lo]
    if lo < w:
        # decades below the first zero, where the integrand is a smooth power law
        n_dec = max(1, math.ceil(math.log10(w / lo)))
        points.extend(np.geomspace(lo, w, n_dec + 1)[1:])
        first = w
    else:
        first = math.ceil(lo / w) * w
        if first <= lo * (1 + 1e-12):
            first += w
        points.append(first)
    points.extend(first + w * np.arange(1, n_lobes))
    edges = np.asarray(points, dtype=float)

    end = float(edges[-1])
    if end >= hi:
        edges = np.append(edges[edges < hi], hi)
        end = hi
    return edges, end


def _check(result: OverlapResult, name: str, t: float, epsabs: float, epsrel: float, converged: bool):
    if not (math.isfinite(result.value) and math.isfinite(result.est_error)):
        raise QuadratureError(name, t, result.est_error, math.nan,
                              f"non-finite result {result.value:.3g} ± {result.est_error:.3g}")
    tol = max(epsabs, epsrel * abs(result.value))
    if not converged and result.est_error > tol:
        raise QuadratureError(name, t, result.est_error, tol)


def _lobe_integral(integrand, edges: np.ndarray, epsabs: float, epsrel: float) -> tuple[OverlapResult, bool]:
    a = edges[:-1]
    width = np.diff(edges)

    def mapped(s: float) -> float:
        return float(np.sum(integrand(a + s * width) * width))

    out = integrate.quad(
        mapped, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=settings.quad_limit, full_output=1
    )
    value, abserr, info = out[0], out[1], out[2]
    return OverlapResult(value, abserr, int(info["neval"])), len(out) == 3


def _fourier_tail(spec: NoiseSpectrum, seq: PulseSequence, t: float, lo: float,
                  epsabs: float, epsrel: float) -> tuple[OverlapResult, bool]:
    """∫_lo^{ωuv} |f̃_t|² A²/ω^α dω via the edge-weight expansion."""
    hi = spec.omega_uv
    amp2 = spec.amplitude ** 2
    power = spec.alpha + 2.0
    c = seq.edge_weights
    tau = seq.segment_edges * t

    # diagonal: Σ c_p² ∫ A² ω^{-(α+2)}
    p = power - 1.0
    diag = float(np.sum(c ** 2)) * amp2 * (lo ** -p - hi ** -p) / p
    total = OverlapResult(diag, 0.0, 0)
    converged = True

    lags: dict[float, float] = {}
    for i in range(len(c)):
        for j in range(i + 1, len(c)):
            lag = round(float(tau[j] - tau[i]), 12)
            lags[lag] = lags.get(lag, 0.0) + 2.0 * c[i] * c[j]

    def unit_power(u):
        return u ** -power

    for lag, weight in sorted(lags.items()):
        if weight == 0.0:
            continue
        part = 0.0
        err = 0.0
        n = 0
        for start, sign in ((lo, 1.0), (hi, -1.0)):
            # w = start·u keeps the integrand O(1) on [1, inf)
            scale = amp2 * start ** (1.0 - power)
            out = integrate.quad(unit_power, 1.0, np.inf, weight="cos", wvar=lag * start,
                                 epsabs=min(epsabs / scale, epsrel), limlst=100, full_output=1)
            part += sign * scale * out[0]
            err += scale * out[1]
            n += int(out[2].get("neval", 0)) if isinstance(out[2], dict) else 0
            converged = converged and len(out) == 3
        total = total + OverlapResult(weight * part, abs(weight) * err, n)
    return total, converged


def overlap(spec: NoiseSpectrum, seq: PulseSequence, t: float, lo: float, name: str) -> OverlapResult:
    """∫_lo^{ωuv} dω |f̃_t(ω)|² S̃(ω) for the power-law part of `spec`."""
    if t <= 0:
        raise ValueError(f"t must be > 0, got {t}")
    if spec.amplitude == 0.0 or lo >= spec.omega_uv:
        return ZERO

    epsabs = settings.quad_epsabs
    epsrel = settings.quad_epsrel
    n_lobes = settings.tail_lobes * (seq.n_pulses + 1)
    edges, end = _piece_edges(lo, spec.omega_uv, t, n_lobes)

    def integrand(w):
        return filter_abs2(seq, t, w) * psd_eval(spec, w)

    result, converged = _lobe_integral(integrand, edges, epsabs, epsrel)
    _check(result, name, t, epsabs, epsrel, converged)

    if end < spec.omega_uv:
        tail, tail_ok = _fourier_tail(spec, seq, t, end, epsabs, epsrel)
        _check(tail, f"{name} tail", t, epsabs, epsrel, tail_ok)
        result = result + tail
    logger.debug(f"{name} t={t:.6g}: {result.value:.6g} ± {result.est_error:.2g} ({result.n_evals} evals)")
    return result


def decay_exponent(spec: NoiseSpectrum, seq: PulseSequence, t: float) -> OverlapResult:
    """∫_{ω0}^{ωuv} dω/2π |f̃_t|² S̃ plus the quasi-static σ_qs²·f̃_t(0)²/2."""
    dynamic = overlap(spec, seq, t, spec.omega_low, "decay exponent").scaled(1.0 / (2.0 * math.pi))
    static = 0.5 * spec.sigma_qs ** 2 * filter_at_zero(seq, t) ** 2
    return dynamic + OverlapResult(static, 0.0, 0)


def chi_decay_factors(noise: TwoAxisNoise, wp: WorkingPoint, seq: PulseSequence, t: float) -> tuple[float, float]:
    """First-order decay factors (c_z, c_x)."""
    c2 = math.cos(wp.chi) ** 2
    s2 = math.sin(wp.chi) ** 2
    ez = decay_exponent(noise.sz, seq, t).value if c2 > 0 else 0.0
    ex = decay_exponent(noise.sx, seq, t).value if s2 > 0 else 0.0
    return math.exp(-c2 * ez), math.exp(-s2 * ex)


def s_hf(spec: NoiseSpectrum, seq: PulseSequence, t: float, omega1: float | None = None) -> OverlapResult:
    """S^hf(t) = ∫_{ω1}^{ωuv} dω/π |f̃_t|² S̃; ω1 defaults to 1/t."""
    cutoff = effective_cutoff(spec, resolve_cutoff(t, omega1))
    return overlap(spec, seq, t, cutoff, "S_hf").scaled(1.0 / math.pi)


def combined_hf(noise: TwoAxisNoise, wp: WorkingPoint, seq: PulseSequence, t: float,
                omega1: float | None = None) -> AxisCombination:
    """S±^hf and S̄±^hf from the two axis correlators."""
    z = s_hf(noise.sz, seq, t, omega1).value
    x = s_hf(noise.sx, seq, t, omega1).value
    return AxisCombination.of(z, x, wp.chi)
