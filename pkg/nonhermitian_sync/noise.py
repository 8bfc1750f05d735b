"""Thermal-noise ensembles of the linear star network.

Each path is the exact deterministic trajectory plus a stochastic convolution
advanced with the one-step propagator ``P = exp(-i H dt)``:

    N_{k+1} = P N_k + i dW_k,    dW_k ~ Normal(0, xi^2 dt) per mode

Paths draw from independent Philox streams keyed by ``(seed, path_index)``, so
results do not depend on chunking or thread count.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from nonhermitian_sync.errors import NumericalFailureError, ParameterError
from nonhermitian_sync.params import SystemParams, build_evolution_matrix, wrap_angle
from nonhermitian_sync.propagator import as_state, evolve_linear

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy Philox via SeedSequence([seed, path_index])"
CHUNK_BUDGET = 2_000_000
NOISE_FLOOR_FACTOR = 5.0


@dataclass(frozen=True)
class NoiseConfig:
    temperature: float = 0.0
    aux_occupation_freq: Optional[float] = None
    seed: int = 0
    n_paths: int = 1
    dt: float = 0.01
    record_every: int = 1

    def __post_init__(self) -> None:
        problems = []
        if not math.isfinite(self.temperature) or self.temperature < 0:
            problems.append("temperature must be finite and >= 0")
        if self.n_paths < 1:
            problems.append("n_paths must be >= 1")
        if not (math.isfinite(self.dt) and self.dt > 0):
            problems.append("dt must be > 0")
        if self.record_every < 1:
            problems.append("record_every must be >= 1")
        if self.seed < 0:
            problems.append("seed must be >= 0")
        if problems:
            raise ParameterError("; ".join(problems))


@dataclass(frozen=True)
class Ensemble:
    times: np.ndarray
    paths: np.ndarray
    seed: int
    rng_algorithm: str
    weights: np.ndarray

    @property
    def n_paths(self) -> int:
        return int(self.paths.shape[0])

    def mean(self) -> np.ndarray:
        return self.paths.mean(axis=0)

    def standard_error(self) -> np.ndarray:
        """Standard error of the ensemble mean, real and imaginary parts combined."""
        if self.n_paths < 2:
            return np.zeros(self.paths.shape[1:])
        return np.sqrt(
            (self.paths.real.var(axis=0, ddof=1) + self.paths.imag.var(axis=0, ddof=1)) / self.n_paths
        )


def path_generator(seed: int, path_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, path_index])))


def noise_weights(params: SystemParams, cfg: NoiseConfig) -> np.ndarray:
    """``xi_i = sqrt(2 gamma_i T / omega_i)``; mode 0 may use its own occupation frequency."""
    weights = np.zeros(params.n_modes + 1)
    if cfg.temperature == 0:
        return weights
    aux_freq = params.omega0 if cfg.aux_occupation_freq is None else cfg.aux_occupation_freq
    if aux_freq <= 0 or params.omega <= 0:
        raise ParameterError("noise weights need positive mode frequencies when T > 0")
    weights[0] = math.sqrt(2.0 * params.gamma0 * cfg.temperature / aux_freq)
    weights[1:] = math.sqrt(2.0 * params.gamma * cfg.temperature / params.omega)
    return weights


def _chunks(n_paths: int, n_steps: int, dim: int) -> List[range]:
    size = max(1, CHUNK_BUDGET // max(1, n_steps * dim))
    return [range(start, min(start + size, n_paths)) for start in range(0, n_paths, size)]


def _convolve_chunk(
    indices: range,
    seed: int,
    step_matrix: np.ndarray,
    sigma: np.ndarray,
    n_steps: int,
    record_every: int,
) -> np.ndarray:
    dim = sigma.size
    increments = np.stack(
        [path_generator(seed, p).standard_normal((n_steps, dim)) for p in indices]
    ) * sigma
    n_records = n_steps // record_every + 1
    out = np.zeros((len(indices), n_records, dim), dtype=complex)
    state = np.zeros((len(indices), dim), dtype=complex)
    transposed = step_matrix.T
    for k in range(n_steps):
        state = state @ transposed + 1j * increments[:, k, :]
        if (k + 1) % record_every == 0:
            out[:, (k + 1) // record_every] = state
    return out


def sde_evolve(
    params: SystemParams,
    cfg: NoiseConfig,
    a0: np.ndarray,
    t_final: float,
    threads: int = 1,
) -> Ensemble:
    """Simulate ``cfg.n_paths`` noisy trajectories of the linear model."""
    n_steps = int(round(t_final / cfg.dt))
    if n_steps < 1:
        raise ParameterError("t_final must cover at least one step")
    if not math.isclose(n_steps * cfg.dt, t_final, rel_tol=1e-9):
        logger.warning(f"t_final={t_final} is not a multiple of dt; using {n_steps * cfg.dt}")
    dim = params.n_modes + 1
    state = as_state(a0, dim)
    times = np.arange(0, n_steps + 1, cfg.record_every) * cfg.dt
    deterministic = evolve_linear(params, state, times).states
    weights = noise_weights(params, cfg)

    paths = np.broadcast_to(deterministic, (cfg.n_paths,) + deterministic.shape).copy()
    if np.any(weights > 0):
        step_matrix = expm(-1j * build_evolution_matrix(params) * cfg.dt)
        sigma = weights * math.sqrt(cfg.dt)
        chunks = _chunks(cfg.n_paths, n_steps, dim)
        workers = threads if threads > 0 else (os.cpu_count() or 1)
        logger.info(f"simulating {cfg.n_paths} paths in {len(chunks)} chunks on {workers} threads")

        def run(chunk: range) -> np.ndarray:
            return _convolve_chunk(chunk, cfg.seed, step_matrix, sigma, n_steps, cfg.record_every)

        if workers == 1 or len(chunks) == 1:
            results = [run(chunk) for chunk in chunks]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run, chunks))
        for chunk, noise in zip(chunks, results):
            paths[chunk.start : chunk.stop] += noise

    if not np.all(np.isfinite(paths)):
        raise NumericalFailureError("non-finite amplitudes in the noise ensemble")
    return Ensemble(times, paths, cfg.seed, RNG_ALGORITHM, weights)


@dataclass(frozen=True)
class PhaseStats:
    times: np.ndarray
    mean_dphi: np.ndarray
    var_dphi: np.ndarray
    valid: np.ndarray
    excluded: np.ndarray
    total: int

    @property
    def excluded_fraction(self) -> np.ndarray:
        return self.excluded / self.total


def phase_stats(
    ens: Ensemble,
    ref_mode: int = 0,
    modes: Optional[Sequence[int]] = None,
    exclude_noise_dominated: bool = True,
    floor_factor: float = NOISE_FLOOR_FACTOR,
) -> PhaseStats:
    """Mean and variance of ``phi_j - phi_ref`` across the ensemble at each time.

    Differences start wrapped into (-pi, pi] and are followed continuously in
    time. A sample counts as noise dominated when either amplitude is below
    ``floor_factor`` times the ensemble spread of that mode.
    """
    dim = ens.paths.shape[2]
    if not 0 <= ref_mode < dim:
        raise ParameterError(f"ref_mode must lie in [0, {dim})")
    others = [j for j in (range(dim) if modes is None else modes) if j != ref_mode]
    if not others:
        raise ParameterError("phase_stats needs at least one mode besides the reference")

    paths = ens.paths
    spread = np.sqrt(np.mean(np.abs(paths - paths.mean(axis=0)) ** 2, axis=0))
    resolved = np.abs(paths) >= floor_factor * spread
    usable = resolved[:, :, [ref_mode]] & resolved[:, :, others]

    phases = np.angle(paths)
    dphi = np.unwrap(wrap_angle(phases[:, :, others] - phases[:, :, [ref_mode]]), axis=1)

    weights = usable if exclude_noise_dominated else np.ones_like(usable)
    counts = weights.sum(axis=(0, 2))
    valid = counts > 0
    safe = np.where(valid, counts, 1)
    mean = np.where(weights, dphi, 0.0).sum(axis=(0, 2)) / safe
    var = np.where(weights, (dphi - mean[None, :, None]) ** 2, 0.0).sum(axis=(0, 2)) / safe
    mean = np.where(valid, mean, np.nan)
    var = np.where(valid, var, np.nan)
    excluded = (~usable).sum(axis=(0, 2))
    return PhaseStats(ens.times, mean, var, valid, excluded, paths.shape[0] * len(others))


def noise_time(ens: Ensemble, ref_mode: int = 0, floor_factor: float = NOISE_FLOOR_FACTOR) -> Optional[float]:
    """First time at which more than half of the samples are noise dominated."""
    stats = phase_stats(ens, ref_mode, exclude_noise_dominated=False, floor_factor=floor_factor)
    crossed = np.flatnonzero(stats.excluded_fraction > 0.5)
    if crossed.size == 0:
        return None
    return float(ens.times[crossed[0]])
