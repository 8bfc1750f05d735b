"""Frequency-disorder experiments on the star network.

Main-mode frequencies are drawn as ``mean_freq + sigma * x`` with ``x`` a
standard normal vector from a Philox stream keyed by ``(seed, trial)``. The
same ``x`` is reused for every ``sigma`` (common random numbers).
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigvals, expm
from scipy.signal import find_peaks
from scipy.stats import chisquare

from nonhermitian_sync.errors import NoDominantModeError, ParameterError, UndampedSystemError
from nonhermitian_sync.params import SystemParams, build_evolution_matrix, wrap_angle

logger = logging.getLogger(__name__)

HISTOGRAM_BINS = 64
SMOOTHING_WIDTH = 3
MIN_PEAK_SEPARATION = math.pi / 4
TROUGH_RATIO = 0.6
MIN_PEAK_SHARE = 0.25
PEAK_WINDOW = math.pi / 8
DOMINANCE = 1e-10
LINEAR_REGIME_FRACTION = 0.05


@dataclass(frozen=True)
class DisorderConfig:
    mean_freq: float
    sigma: float = 0.0
    n_trials: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ParameterError("sigma must be finite and >= 0")
        if self.n_trials < 1:
            raise ParameterError("n_trials must be >= 1")
        if self.seed < 0:
            raise ParameterError("seed must be >= 0")


@dataclass(frozen=True)
class PhaseHistogram:
    edges: np.ndarray
    counts: np.ndarray
    smoothed: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


@dataclass(frozen=True)
class DisorderReport:
    sigma: float
    sigma_phi: float
    z_mean: float
    z_se: float
    histogram: PhaseHistogram
    bimodal: bool
    peak_locations: Tuple[float, ...]
    dphi: np.ndarray


@dataclass(frozen=True)
class SigmaSweep:
    sigmas: np.ndarray
    sigma_phi: np.ndarray
    z_mean: np.ndarray
    z_se: np.ndarray
    slope: float
    r_squared: float
    reports: Tuple[DisorderReport, ...]


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))


def sample_frequencies(cfg: DisorderConfig, n_modes: int, trial: int) -> np.ndarray:
    offsets = trial_generator(cfg.seed, trial).standard_normal(n_modes)
    return cfg.mean_freq + cfg.sigma * offsets


def readout_amplitudes(params: SystemParams, freqs: np.ndarray) -> np.ndarray:
    """Amplitudes whose phases are compared for one disorder realisation.

    Driven systems use the stationary solution. Undriven systems are evolved
    until every non-dominant eigenmode is suppressed by ``DOMINANCE``.
    """
    matrix = build_evolution_matrix(params, main_freqs=freqs)
    levels = eigvals(matrix)
    if params.is_driven:
        if np.max(levels.imag) >= 0:
            raise UndampedSystemError("disordered spectrum is not strictly damped")
        source = np.zeros(matrix.shape[0], dtype=complex)
        source[0] = params.drive
        return np.linalg.solve(matrix, -1j * source)

    order = np.argsort(levels.imag)[::-1]
    dominant = levels[order[0]]
    gap = float(levels[order[0]].imag - levels[order[1]].imag)
    scale = max(float(np.max(np.abs(levels))), 1.0)
    if gap <= 1e-9 * scale:
        raise NoDominantModeError("no unique slowest-decaying mode in this realisation")
    t_read = math.log(1.0 / DOMINANCE) / gap
    shifted = matrix - dominant * np.eye(matrix.shape[0])
    return expm(-1j * shifted * t_read) @ np.ones(matrix.shape[0], dtype=complex)


def phase_offsets(amplitudes: np.ndarray) -> np.ndarray:
    """``phi_0 - phi_i`` for every main mode, wrapped into (-pi, pi]."""
    phases = np.angle(amplitudes)
    return wrap_angle(phases[0] - phases[1:])


def phase_histogram(dphi: np.ndarray, bins: int = HISTOGRAM_BINS) -> PhaseHistogram:
    edges = np.linspace(-math.pi, math.pi, bins + 1)
    counts, _ = np.histogram(wrap_angle(np.asarray(dphi, dtype=float)), bins=edges)
    half = SMOOTHING_WIDTH // 2
    smoothed = sum(np.roll(counts, shift) for shift in range(-half, half + 1)) / SMOOTHING_WIDTH
    return PhaseHistogram(edges, counts, smoothed.astype(float))


def _circular_peaks(values: np.ndarray) -> np.ndarray:
    pad = values.size // 4
    extended = np.concatenate([values[-pad:], values, values[:pad]])
    peaks, _ = find_peaks(extended)
    inside = peaks[(peaks >= pad) & (peaks < pad + values.size)] - pad
    return np.unique(inside)


def _circular_mean_near(samples: np.ndarray, center: float) -> float:
    near = samples[np.abs(wrap_angle(samples - center)) <= PEAK_WINDOW]
    if near.size == 0:
        return float(center)
    return float(np.angle(np.mean(np.exp(1j * near))))


def detect_bimodality(hist: PhaseHistogram, samples: np.ndarray) -> Tuple[bool, Tuple[float, ...]]:
    """Look for two well separated peaks with a deep trough between them.

    Peaks must be at least ``pi/4`` apart, the lower one must reach a quarter
    of the higher, and the smoothed counts along the shorter arc joining them
    must drop below 0.6 of the lower peak.
    """
    smoothed = hist.smoothed
    bins = smoothed.size
    peaks = _circular_peaks(smoothed)
    if peaks.size < 2:
        return False, tuple(_circular_mean_near(samples, hist.centers[p]) for p in peaks)

    width = 2 * math.pi / bins
    best: Optional[Tuple[int, int]] = None
    best_height = -1.0
    for a_pos, a in enumerate(peaks):
        for b in peaks[a_pos + 1 :]:
            gap = int(b - a)
            short = min(gap, bins - gap)
            if short * width < MIN_PEAK_SEPARATION:
                continue
            lower = min(smoothed[a], smoothed[b])
            if lower < MIN_PEAK_SHARE * max(smoothed[a], smoothed[b]):
                continue
            if gap <= bins - gap:
                arc = smoothed[a : b + 1]
            else:
                arc = np.concatenate([smoothed[b:], smoothed[: a + 1]])
            if arc.min() < TROUGH_RATIO * lower and lower > best_height:
                best, best_height = (int(a), int(b)), float(lower)

    if best is None:
        top = int(peaks[np.argmax(smoothed[peaks])])
        return False, (_circular_mean_near(samples, hist.centers[top]),)
    located = sorted(_circular_mean_near(samples, hist.centers[p]) for p in best)
    return True, tuple(located)


def histogram_symmetry(hist: PhaseHistogram) -> float:
    """p-value of a chi-square test that the histogram is mirror symmetric about 0."""
    counts = hist.counts
    half = counts.size // 2
    left = counts[:half]
    right = counts[::-1][:half]
    used = (left + right) > 0
    if not np.any(used):
        return 1.0
    observed = np.concatenate([left[used], right[used]]).astype(float)
    expected = np.tile((left[used] + right[used]) / 2.0, 2)
    pairs = int(used.sum())
    return float(chisquare(observed, expected, ddof=pairs - 1).pvalue)


def _run_trial(params: SystemParams, cfg: DisorderConfig, trial: int) -> Tuple[np.ndarray, float]:
    freqs = sample_frequencies(cfg, params.n_modes, trial)
    dphi = phase_offsets(readout_amplitudes(params, freqs))
    z = float(abs(np.mean(np.exp(-1j * dphi))))
    return dphi, z


def run_disorder(params: SystemParams, cfg: DisorderConfig, threads: int = 1) -> DisorderReport:
    """Pool phase offsets over ``cfg.n_trials`` disorder realisations."""
    workers = threads if threads > 0 else (os.cpu_count() or 1)
    trials = range(cfg.n_trials)
    if workers == 1 or cfg.n_trials == 1:
        results = [_run_trial(params, cfg, t) for t in trials]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: _run_trial(params, cfg, t), trials))

    dphi = np.concatenate([r[0] for r in results])
    zs = np.array([r[1] for r in results])
    z_se = float(zs.std(ddof=1) / math.sqrt(zs.size)) if zs.size > 1 else 0.0
    hist = phase_histogram(dphi)
    bimodal, peaks = detect_bimodality(hist, dphi)
    logger.debug(f"sigma={cfg.sigma:g}: z={zs.mean():.4f} bimodal={bimodal}")
    return DisorderReport(
        sigma=cfg.sigma,
        sigma_phi=float(np.std(dphi)),
        z_mean=float(zs.mean()),
        z_se=z_se,
        histogram=hist,
        bimodal=bimodal,
        peak_locations=peaks,
        dphi=dphi,
    )


def sweep_sigma(
    params: SystemParams,
    cfg: DisorderConfig,
    sigma_grid: Sequence[float],
    small_sigma_max: Optional[float] = None,
    threads: int = 1,
) -> SigmaSweep:
    """Run every ``sigma`` and fit ``sigma_phi = c * sigma`` through the origin on the small ones."""
    grid = np.asarray(sigma_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ParameterError("sigma grid must be strictly increasing")
    limit = LINEAR_REGIME_FRACTION * abs(cfg.mean_freq) if small_sigma_max is None else small_sigma_max
    reports: List[DisorderReport] = [run_disorder(params, replace(cfg, sigma=float(s)), threads) for s in grid]
    sigma_phi = np.array([r.sigma_phi for r in reports])

    small = (grid <= limit) & (grid > 0)
    if small.sum() < 3:
        raise ParameterError(f"need at least 3 sigma values in (0, {limit:g}] for the linear fit")
    x, y = grid[small], sigma_phi[small]
    slope = float(np.dot(x, y) / np.dot(x, x))
    ss_res = float(np.sum((y - slope * x) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return SigmaSweep(
        sigmas=grid,
        sigma_phi=sigma_phi,
        z_mean=np.array([r.z_mean for r in reports]),
        z_se=np.array([r.z_se for r in reports]),
        slope=slope,
        r_squared=r_squared,
        reports=tuple(reports),
    )
