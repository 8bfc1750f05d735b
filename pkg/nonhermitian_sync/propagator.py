"""Exact linear propagation of the star network.

Away from exceptional points the evolution matrix is diagonalised in closed
form by a Fourier transform followed by a shear between the auxiliary mode and
the bright (uniform) main-mode combination. At an exceptional point the dense
augmented-matrix exponential is used instead.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import expm

from nonhermitian_sync.basis import fourier_inverse, fourier_transform, shear_inverse, shear_matrix
from nonhermitian_sync.errors import (
    ConditionError,
    DarkDominatedError,
    ExceptionalPointError,
    NoDominantModeError,
    NumericalFailureError,
    ParameterError,
    UndampedSystemError,
)
from nonhermitian_sync.params import (
    Branch,
    DerivedParams,
    SystemParams,
    build_evolution_matrix,
    derived_params,
)

logger = logging.getLogger(__name__)

SERIES_CUTOFF = 1e-6
DEGENERACY_TOL = 1e-9
STEADY_RESIDUAL_TOL = 1e-10


class Frame(str, Enum):
    ROTATING = "rotating"
    LAB = "lab"


@dataclass(frozen=True)
class Spectrum:
    lambda_plus: complex
    lambda_minus: complex
    lambda_dark: complex
    n_dark: int
    ep_flag: bool

    def eigenvalues(self) -> np.ndarray:
        """All ``N + 1`` eigenvalues with multiplicity, bright pair first."""
        values = [self.lambda_plus, self.lambda_minus] + [self.lambda_dark] * self.n_dark
        return np.asarray(values, dtype=complex)

    @property
    def trace(self) -> complex:
        return complex(self.lambda_plus + self.lambda_minus + self.n_dark * self.lambda_dark)

    @property
    def max_decay_imag(self) -> float:
        return float(self.eigenvalues().imag.max())


@dataclass(frozen=True)
class Trajectory:
    """Complex amplitudes sampled on a strictly increasing time grid."""

    times: np.ndarray
    states: np.ndarray
    frame: Frame = Frame.ROTATING

    def __post_init__(self) -> None:
        if self.states.ndim != 2 or self.states.shape[0] != self.times.shape[0]:
            raise ParameterError(
                f"states shape {self.states.shape} does not match {self.times.shape[0]} times"
            )

    @property
    def n_times(self) -> int:
        return int(self.times.shape[0])

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])

    def final(self) -> np.ndarray:
        return self.states[-1]

    def amplitudes(self) -> np.ndarray:
        return np.abs(self.states)

    def phases(self) -> np.ndarray:
        """Phases unwrapped along time."""
        return np.unwrap(np.angle(self.states), axis=0)


def as_time_grid(times: np.ndarray) -> np.ndarray:
    grid = np.atleast_1d(np.asarray(times, dtype=float))
    if grid.ndim != 1 or grid.size == 0:
        raise ParameterError("times must be a non-empty 1-D grid")
    if not np.all(np.isfinite(grid)):
        raise ParameterError("times must be finite")
    if grid[0] < 0:
        raise ParameterError("times must be >= 0")
    if np.any(np.diff(grid) <= 0):
        raise ParameterError("times must be strictly increasing")
    return grid


def as_state(a0: np.ndarray, dim: int) -> np.ndarray:
    state = np.asarray(a0, dtype=complex)
    if state.shape != (dim,):
        raise ParameterError(f"initial state must have shape ({dim},), got {state.shape}")
    if not np.all(np.isfinite(state)):
        raise ParameterError("initial state must be finite")
    return state


def spectrum(params: SystemParams) -> Spectrum:
    """Closed-form eigenvalues: the bright pair plus ``N - 1`` dark modes."""
    derived = derived_params(params)
    shift = derived.main_level
    b = derived.half_split
    return Spectrum(
        lambda_plus=shift + b + derived.mu,
        lambda_minus=shift + b - derived.mu,
        lambda_dark=shift,
        n_dark=params.n_modes - 1,
        ep_flag=derived.ep_flag,
    )


def classify_levels(spec: Spectrum) -> str:
    """Name how the bright pair splits: repulsion, attraction, mixed or degenerate."""
    split = spec.lambda_plus - spec.lambda_minus
    size = abs(split)
    if size == 0 or spec.ep_flag:
        return "degenerate"
    if abs(split.imag) <= DEGENERACY_TOL * size:
        return "repulsion"
    if abs(split.real) <= DEGENERACY_TOL * size:
        return "attraction"
    return "mixed"


def _eigenbasis(
    params: SystemParams, derived: DerivedParams
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(W, W_inv, levels)`` with ``W H W_inv = diag(levels)``.

    The branch with ``|s| <= 1`` keeps the shear well conditioned.
    """
    n = params.n_modes
    b = derived.half_split
    branch = Branch.PLUS if abs(b + derived.mu) >= abs(b - derived.mu) else Branch.MINUS
    s = derived.shear(branch)
    isolated = derived.main_level + derived.relative_level(branch)
    other = Branch.MINUS if branch is Branch.PLUS else Branch.PLUS
    bright = derived.main_level + derived.relative_level(other)

    levels = np.full(n + 1, derived.main_level, dtype=complex)
    levels[0] = isolated
    levels[n] = bright
    forward = shear_matrix(n, s) @ fourier_transform(n)
    backward = fourier_inverse(n) @ shear_inverse(n, s)
    return forward, backward, levels


def _drive_kernel(levels: np.ndarray, times: np.ndarray) -> np.ndarray:
    """``(1 - exp(-i lambda t)) / (i lambda)`` with a series near ``lambda t = 0``."""
    lt = np.outer(times, levels)
    x = 1j * lt
    t = np.broadcast_to(times[:, None], lt.shape)
    kernel = np.empty(lt.shape, dtype=complex)
    small = np.abs(lt) < SERIES_CUTOFF
    xs = x[small]
    kernel[small] = t[small] * (1 - xs / 2 + xs * xs / 6)
    lam = np.broadcast_to(levels[None, :], lt.shape)[~small]
    kernel[~small] = -np.expm1(-x[~small]) / (1j * lam)
    return kernel


def evolve_linear(params: SystemParams, a0: np.ndarray, times: np.ndarray) -> Trajectory:
    """Propagate ``a0`` exactly on ``times`` in the rotating frame."""
    grid = as_time_grid(times)
    dim = params.n_modes + 1
    state = as_state(a0, dim)
    derived = derived_params(params)
    if derived.ep_flag:
        logger.info("exceptional point detected; using the dense propagator")
        drive = np.zeros(dim, dtype=complex)
        drive[0] = 1.0
        return propagate_dense(build_evolution_matrix(params), state, params.drive, grid, drive)

    forward, backward, levels = _eigenbasis(params, derived)
    modal = np.exp(-1j * np.outer(grid, levels)) * (forward @ state)
    if params.drive:
        modal = modal + params.drive * _drive_kernel(levels, grid) * forward[:, 0]
    states = modal @ backward.T
    states[grid == 0] = state
    if not np.all(np.isfinite(states)):
        bad = int(np.argmax(~np.all(np.isfinite(states), axis=1)))
        raise NumericalFailureError("non-finite amplitudes in linear propagation", step=bad)
    return Trajectory(grid, states, Frame.ROTATING)


def propagate_dense(
    matrix: np.ndarray,
    a0: np.ndarray,
    drive: float,
    times: np.ndarray,
    drive_vector: Optional[np.ndarray] = None,
) -> Trajectory:
    """Propagate with the matrix exponential of the augmented affine system.

    ``drive_vector`` defaults to the auxiliary mode ``(1, 0, ..., 0)``. The
    initial state is taken at ``t = 0``.
    """
    h = np.asarray(matrix, dtype=complex)
    dim = h.shape[0]
    if h.shape != (dim, dim):
        raise ParameterError("evolution matrix must be square")
    grid = as_time_grid(times)
    state = as_state(a0, dim)
    if drive_vector is None:
        drive_vector = np.zeros(dim, dtype=complex)
        drive_vector[0] = 1.0

    generator = np.zeros((dim + 1, dim + 1), dtype=complex)
    generator[:dim, :dim] = -1j * h
    generator[:dim, dim] = drive * np.asarray(drive_vector, dtype=complex)

    cache: Dict[float, np.ndarray] = {}
    current = np.append(state, 1.0)
    previous = 0.0
    states = np.empty((grid.size, dim), dtype=complex)
    for k, t in enumerate(grid):
        dt = float(t - previous)
        if dt > 0:
            step = cache.get(dt)
            if step is None:
                step = expm(generator * dt)
                cache[dt] = step
            current = step @ current
        if not np.all(np.isfinite(current)):
            raise NumericalFailureError("non-finite amplitudes in dense propagation", step=k)
        states[k] = current[:dim]
        previous = float(t)
    return Trajectory(grid, states, Frame.ROTATING)


def to_lab_frame(traj: Trajectory, params: SystemParams) -> Trajectory:
    """Undo the rotating frame: multiply every mode by ``exp(-i Omega t)``."""
    if traj.frame is Frame.LAB:
        return traj
    factor = np.exp(-1j * params.frame_freq * traj.times)[:, None]
    return Trajectory(traj.times, traj.states * factor, Frame.LAB)


def to_rotating_frame(traj: Trajectory, params: SystemParams) -> Trajectory:
    if traj.frame is Frame.ROTATING:
        return traj
    factor = np.exp(1j * params.frame_freq * traj.times)[:, None]
    return Trajectory(traj.times, traj.states * factor, Frame.ROTATING)


def steady_state(params: SystemParams) -> np.ndarray:
    """Stationary amplitudes of the driven system in the rotating frame."""
    if not params.is_driven:
        raise ConditionError("steady state requires drive > 0")
    spec = spectrum(params)
    if spec.max_decay_imag >= 0:
        raise UndampedSystemError(
            f"spectrum is not strictly damped (max Im lambda = {spec.max_decay_imag:.3g})"
        )
    matrix = build_evolution_matrix(params)
    source = np.zeros(params.n_modes + 1, dtype=complex)
    source[0] = params.drive
    amplitudes = np.linalg.solve(matrix, -1j * source)
    residual = float(np.max(np.abs(-1j * (matrix @ amplitudes) + source)))
    if residual > STEADY_RESIDUAL_TOL * params.drive:
        logger.warning(f"steady-state residual {residual:.3g} exceeds tolerance")
    return amplitudes


def long_time_ratio(params: SystemParams) -> complex:
    """Ratio ``alpha_k / alpha_0`` carried by the mode that survives longest.

    For a driven system this is the stationary ratio. Undriven, it belongs to
    the slowest-decaying bright eigenmode.
    """
    derived = derived_params(params)
    n = params.n_modes
    c = params.coupling_phasor
    if params.is_driven:
        if derived.main_level == 0:
            raise UndampedSystemError("main modes are resonant and undamped")
        return complex(-c / (math.sqrt(n) * derived.main_level))
    if derived.ep_flag:
        raise ExceptionalPointError("long-time ratio is undefined at an exceptional point")
    if params.coupling == 0:
        raise NoDominantModeError("uncoupled modes carry no phase relation")

    rel_plus = derived.relative_level(Branch.PLUS)
    rel_minus = derived.relative_level(Branch.MINUS)
    scale = max(abs(rel_plus), abs(rel_minus))
    if abs(rel_plus.imag - rel_minus.imag) <= DEGENERACY_TOL * scale:
        raise NoDominantModeError("bright eigenvalues decay at the same rate")
    if rel_plus.imag > rel_minus.imag:
        long_lived, isolated = rel_plus, Branch.MINUS
    else:
        long_lived, isolated = rel_minus, Branch.PLUS
    if n >= 2 and long_lived.imag <= DEGENERACY_TOL * scale:
        raise DarkDominatedError("dark modes decay no faster than the bright sector")
    logger.debug(f"long-lived relative eigenvalue {long_lived}")
    return complex(-1.0 / (math.sqrt(n) * derived.shear(isolated)))
