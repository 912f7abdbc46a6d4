"""
Monte Carlo reference for the coherence function.

Noise trajectories are synthesized as sums of sinusoids on a log-spaced
frequency grid, the full time-dependent two-level Hamiltonian ½[B + ξ(t)]·σ is
propagated step by step with exact SU(2) exponentials, and ρ+− is averaged over
trajectories. Every trajectory owns a SeedSequence([seed, index]) so results do
not depend on batching or thread scheduling.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import signal

from app.core.config import settings
from app.core.errors import StepSizeError
from app.services.model import NoiseSpectrum, TwoAxisNoise, WorkingPoint, power_band, total_variance
from app.services.sequences import PulseSequence, pulse_times

logger = logging.getLogger(__name__)

# dt·B_max above this does not resolve the fastest precession
MAX_STEP_PHASE = 0.05
# time steps per basis-matrix chunk
CHUNK_STEPS = 2048


class McConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_traj: int = Field(default=10_000, ge=1)
    dt: float = Field(default=0.05, gt=0)
    n_freq: int = Field(default=1024, ge=64)
    seed: int = Field(default=1234, ge=0, lt=2 ** 64)
    t_grid: tuple[float, ...] = ()
    batch_size: int = Field(default=256, ge=1)

    @model_validator(mode="after")
    def _check(self):
        if any(t < 0 for t in self.t_grid):
            raise ValueError("t_grid entries must be >= 0")
        return self


@dataclass(frozen=True)
class FrequencyBins:
    omega: np.ndarray
    variance: np.ndarray

    @classmethod
    def of(cls, spec: NoiseSpectrum, n_freq: int) -> "FrequencyBins":
        """Log-spaced bins over [ω0, ωuv]; each carries its exact band variance."""
        if spec.amplitude == 0.0:
            return cls(np.zeros(0), np.zeros(0))
        edges = np.geomspace(spec.omega_low, spec.omega_uv, n_freq + 1)
        variance = np.array([power_band(spec, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])
        return cls(np.sqrt(edges[:-1] * edges[1:]), variance)


@dataclass
class NoiseRealization:
    """
    A batch of Gaussian noise trajectories
    ξ(t) = ξ_qs + Σ_k [a_k cos(ω_k t) + b_k sin(ω_k t)].
    """
    omega: np.ndarray
    a: np.ndarray
    b: np.ndarray
    qs: np.ndarray

    @classmethod
    def draw(cls, spec: NoiseSpectrum, bins: FrequencyBins, rngs: Sequence[np.random.Generator]) -> "NoiseRealization":
        scale = np.sqrt(bins.variance)
        n = len(bins.omega)
        a = np.empty((len(rngs), n))
        b = np.empty((len(rngs), n))
        qs = np.empty(len(rngs))
        for i, rng in enumerate(rngs):
            qs[i] = rng.normal(0.0, spec.sigma_qs) if spec.sigma_qs > 0 else 0.0
            a[i] = rng.normal(0.0, 1.0, n) * scale
            b[i] = rng.normal(0.0, 1.0, n) * scale
        return cls(bins.omega, a, b, qs)

    @property
    def n_traj(self) -> int:
        return len(self.qs)

    def _project(self, mids: np.ndarray, widths: np.ndarray | None) -> np.ndarray:
        out = np.repeat(self.qs[:, None], len(mids), axis=1)
        if len(self.omega) == 0:
            return out
        for lo in range(0, len(mids), CHUNK_STEPS):
            hi = min(lo + CHUNK_STEPS, len(mids))
            phase = np.outer(mids[lo:hi], self.omega)
            cos, sin = np.cos(phase), np.sin(phase)
            if widths is not None:
                # average of cos(ωt) over a step is cos(ω t_mid)·sinc(ω Δ/2)
                damp = np.sinc(np.outer(widths[lo:hi], self.omega) / (2.0 * math.pi))
                cos *= damp
                sin *= damp
            out[:, lo:hi] += self.a @ cos.T + self.b @ sin.T
        return out

    def at(self, times: np.ndarray) -> np.ndarray:
        """Point values ξ(t); shape (n_traj, len(times))."""
        return self._project(np.asarray(times, dtype=float), None)

    def sample(self, edges: np.ndarray) -> np.ndarray:
        """Average of ξ over each step [edges[i], edges[i+1]]; shape (n_traj, n_steps)."""
        edges = np.asarray(edges, dtype=float)
        return self._project(0.5 * (edges[:-1] + edges[1:]), np.diff(edges))


def trajectory_streams(seed: int, index: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (z, x) generators for one trajectory."""
    ss_z, ss_x = np.random.SeedSequence([seed, index]).spawn(2)
    return np.random.default_rng(ss_z), np.random.default_rng(ss_x)


def synthesize_noise(spec: NoiseSpectrum, t_max: float, dt: float, rng: np.random.Generator,
                     n_freq: int = 1024) -> np.ndarray:
    """One trajectory, step-averaged on the uniform dt grid over [0, t_max]."""
    n_steps = max(1, int(math.ceil(t_max / dt - 1e-9)))
    edges = np.linspace(0.0, n_steps * dt, n_steps + 1)
    realization = NoiseRealization.draw(spec, FrequencyBins.of(spec, n_freq), [rng])
    return realization.sample(edges)[0]


def step_unitaries(wp: WorkingPoint, xi_z: np.ndarray, xi_x: np.ndarray, widths: np.ndarray):
    """Exact exp(−i·½(B + ξ)·σ·Δt) per step as (α, β), U = [[α, −β*], [β, α*]]."""
    bz = wp.bz + xi_z
    bx = wp.bx + xi_x
    norm = np.hypot(bx, bz)
    theta = 0.5 * norm * widths
    safe = np.where(norm > 0, norm, 1.0)
    s = np.sin(theta)
    alpha = np.cos(theta) - 1j * s * (bz / safe)
    beta = -1j * s * (bx / safe)
    return alpha, beta


def compose(alpha2, beta2, alpha1, beta1):
    """(α, β) of U2·U1."""
    return alpha2 * alpha1 - np.conj(beta2) * beta1, beta2 * alpha1 + np.conj(alpha2) * beta1


def evolve(wp: WorkingPoint, xi_z: np.ndarray, xi_x: np.ndarray, widths: np.ndarray,
           pulse_after: Sequence[int] = (), record: Sequence[int] = (),
           start: tuple[np.ndarray, np.ndarray] | None = None):
    """
    Propagate a batch through piecewise-constant steps.

    xi_z, xi_x have shape (n_traj, n_steps). A −iσ_y π pulse is applied after
    every step index in `pulse_after`. Returns the final (α, β) and a dict of the
    propagators recorded after the step indices in `record`.
    """
    xi_z = np.atleast_2d(xi_z)
    xi_x = np.atleast_2d(xi_x)
    step_a, step_b = step_unitaries(wp, xi_z, xi_x, np.asarray(widths, dtype=float)[None, :])
    if start is None:
        alpha = np.ones(xi_z.shape[0], dtype=complex)
        beta = np.zeros(xi_z.shape[0], dtype=complex)
    else:
        alpha, beta = start
    pulses = set(pulse_after)
    wanted = set(record)
    history = {}
    for k in range(step_a.shape[1]):
        alpha, beta = compose(step_a[:, k], step_b[:, k], alpha, beta)
        if k in pulses:
            # −iσ_y = [[0, −1], [1, 0]]
            alpha, beta = -beta, alpha
        if k in wanted:
            history[k] = (alpha.copy(), beta.copy())
    return (alpha, beta), history


def coherence_sample(wp: WorkingPoint, alpha: np.ndarray, beta: np.ndarray, n_pulses: int) -> np.ndarray:
    """
    ρ+−(t)/ρ+−(0) for the start state |x′⟩ = (|+⟩ + |−⟩)/√2 in the noiseless
    eigenbasis; each π pulse swaps |±⟩, hence the (−1)^n.
    """
    half = 0.5 * wp.chi
    plus = np.array([math.cos(half), math.sin(half)])
    minus = np.array([-math.sin(half), math.cos(half)])
    x0, x1 = (plus + minus) / math.sqrt(2.0)
    psi0 = alpha * x0 - np.conj(beta) * x1
    psi1 = beta * x0 + np.conj(alpha) * x1
    amp_plus = plus[0] * psi0 + plus[1] * psi1
    amp_minus = minus[0] * psi0 + minus[1] * psi1
    sign = -1.0 if n_pulses % 2 else 1.0
    return sign * 2.0 * amp_plus * np.conj(amp_minus)


@dataclass(frozen=True)
class _Schedule:
    edges: np.ndarray
    pulse_after: tuple[int, ...]
    outputs: dict[int, int] = field(default_factory=dict)  # step index -> grid index


def _uniform_edges(t: float, dt: float, extra: np.ndarray) -> np.ndarray:
    n = max(1, int(math.ceil(t / dt - 1e-9)))
    edges = np.union1d(np.linspace(0.0, t, n + 1), extra)
    return edges[edges <= t]


def _schedules(seq: PulseSequence, t_grid: np.ndarray, dt: float) -> list[_Schedule]:
    positive = [(i, t) for i, t in enumerate(t_grid) if t > 0]
    if not positive:
        return []
    if seq.n_pulses == 0:
        # one shared run serves every grid time
        times = np.array([t for _, t in positive])
        edges = _uniform_edges(float(times.max()), dt, times)
        outputs = {int(np.searchsorted(edges, t)) - 1: i for i, t in positive}
        return [_Schedule(edges, (), outputs)]
    out = []
    for i, t in positive:
        pulses = pulse_times(seq, t)
        edges = _uniform_edges(t, dt, pulses)
        after = tuple(int(np.searchsorted(edges, p)) - 1 for p in pulses)
        out.append(_Schedule(edges, after, {len(edges) - 2: i}))
    return out


def check_step(noise: TwoAxisNoise, wp: WorkingPoint, dt: float):
    spread = math.sqrt(total_variance(noise.sz) + total_variance(noise.sx))
    b_max = wp.magnitude + 4.0 * spread
    if dt > MAX_STEP_PHASE / b_max:
        raise StepSizeError(
            f"dt={dt:.4g} too coarse: need dt <= {MAX_STEP_PHASE / b_max:.4g} (B_max={b_max:.4g})"
        )


@dataclass
class TrajectoryResult:
    t_grid: np.ndarray
    samples: np.ndarray  # (n_traj, n_t) complex

    @property
    def mean(self) -> np.ndarray:
        return np.mean(self.samples, axis=0)

    @property
    def W(self) -> np.ndarray:
        return np.abs(self.mean)

    @property
    def stderr(self) -> np.ndarray:
        n = self.samples.shape[0]
        if n < 2:
            return np.zeros(self.samples.shape[1])
        var = np.var(self.samples.real, axis=0, ddof=1) + np.var(self.samples.imag, axis=0, ddof=1)
        return np.sqrt(var / n)


def _run_batch(noise: TwoAxisNoise, wp: WorkingPoint, seq: PulseSequence, cfg: McConfig,
               bins_z: FrequencyBins, bins_x: FrequencyBins, schedules: list[_Schedule],
               first: int, last: int, n_t: int) -> np.ndarray:
    streams = [trajectory_streams(cfg.seed, i) for i in range(first, last)]
    real_z = NoiseRealization.draw(noise.sz, bins_z, [s[0] for s in streams])
    real_x = NoiseRealization.draw(noise.sx, bins_x, [s[1] for s in streams])

    out = np.ones((last - first, n_t), dtype=complex)
    for sched in schedules:
        n_steps = len(sched.edges) - 1
        state = None
        for lo in range(0, n_steps, CHUNK_STEPS):
            hi = min(lo + CHUNK_STEPS, n_steps)
            edges = sched.edges[lo:hi + 1]
            pulses = [p - lo for p in sched.pulse_after if lo <= p < hi]
            record = [k - lo for k in sched.outputs if lo <= k < hi]
            state, history = evolve(
                wp, real_z.sample(edges), real_x.sample(edges), np.diff(edges),
                pulse_after=pulses, record=record, start=state,
            )
            for k, (alpha, beta) in history.items():
                out[:, sched.outputs[k + lo]] = coherence_sample(wp, alpha, beta, seq.n_pulses)
    return out


def mc_coherence(noise: TwoAxisNoise, wp: WorkingPoint, seq: PulseSequence, t_grid: Sequence[float] | None,
                 cfg: McConfig, workers: int | None = None) -> TrajectoryResult:
    """Trajectory-averaged coherence on t_grid (falls back to cfg.t_grid)."""
    grid = np.asarray(t_grid if t_grid is not None else cfg.t_grid, dtype=float)
    check_step(noise, wp, cfg.dt)
    bins_z = FrequencyBins.of(noise.sz, cfg.n_freq)
    bins_x = FrequencyBins.of(noise.sx, cfg.n_freq)
    schedules = _schedules(seq, grid, cfg.dt)
    samples = np.empty((cfg.n_traj, len(grid)), dtype=complex)

    batches = [(lo, min(lo + cfg.batch_size, cfg.n_traj)) for lo in range(0, cfg.n_traj, cfg.batch_size)]
    logger.info(f"MC {seq.label}: {cfg.n_traj} trajectories in {len(batches)} batches, {len(grid)} times")
    with ThreadPoolExecutor(max_workers=workers or settings.workers) as executor:
        futures = {
            executor.submit(_run_batch, noise, wp, seq, cfg, bins_z, bins_x, schedules, lo, hi, len(grid)): (lo, hi)
            for lo, hi in batches
        }
        for future in as_completed(futures):
            lo, hi = futures[future]
            samples[lo:hi] = future.result()
    return TrajectoryResult(grid, samples)


def log_bands(lo: float, hi: float, per_decade: int = 5) -> np.ndarray:
    n = max(1, int(round(per_decade * math.log10(hi / lo))))
    return np.geomspace(lo, hi, n + 1)


def estimate_psd(samples: np.ndarray, dt: float, bands: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Trajectory-averaged periodogram, band-averaged onto `bands` (angular
    frequency edges) and expressed so that a variance is ∫ dω/π S̃.
    Returns (geometric band centres, S̃ estimates); empty bands give NaN.
    """
    f, pxx = signal.periodogram(np.atleast_2d(samples), fs=1.0 / dt, window="hann", axis=-1)
    omega = 2.0 * math.pi * f
    s_est = 0.5 * np.mean(pxx, axis=0)
    centres = np.sqrt(bands[:-1] * bands[1:])
    values = np.full(len(centres), np.nan)
    for i, (lo, hi) in enumerate(zip(bands[:-1], bands[1:])):
        mask = (omega >= lo) & (omega < hi)
        if np.any(mask):
            values[i] = float(np.mean(s_est[mask]))
    return centres, values
