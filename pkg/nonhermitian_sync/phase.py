"""Amplitude-phase dynamics, RK4 integration and locking diagnostics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Protocol, Sequence, Tuple, Union

import numpy as np
from scipy.stats import linregress

from nonhermitian_sync.errors import NumericalFailureError, ParameterError, SingularAmplitudeError
from nonhermitian_sync.kuramoto import EffectiveParams
from nonhermitian_sync.params import (
    SystemParams,
    build_evolution_matrix,
    derived_params,
    solve_drive_frequency,
    wrap_angle,
)
from nonhermitian_sync.propagator import Trajectory, evolve_linear

logger = logging.getLogger(__name__)

SYNC_THRESHOLD = 0.05 * math.pi
AMPLITUDE_FLOOR = 1e-12
# RK4 steps are capped at STEP_SCALE / (largest row sum of |H|).
STEP_SCALE = 0.01


class Topology(str, Enum):
    STAR_BARE = "star_bare"
    ALL_TO_ALL_COLLECTIVE = "all_to_all_collective"


class SyncVerdict(str, Enum):
    SYNCHRONIZED = "synchronized"
    DECAYED_FIRST = "decayed_first"
    DESYNCHRONIZED = "desynchronized"


@dataclass(frozen=True)
class PhaseState:
    r: np.ndarray
    phi: np.ndarray

    def __post_init__(self) -> None:
        if np.shape(self.r) != np.shape(self.phi) or np.ndim(self.r) != 1:
            raise ParameterError("r and phi must be 1-D arrays of equal length")
        if np.any(np.asarray(self.r) < 0):
            raise ParameterError("amplitudes must be >= 0")

    @classmethod
    def from_complex(cls, values: np.ndarray) -> "PhaseState":
        z = np.asarray(values, dtype=complex)
        return cls(np.abs(z), np.angle(z))

    def to_complex(self) -> np.ndarray:
        return np.asarray(self.r) * np.exp(1j * np.asarray(self.phi))


@dataclass(frozen=True)
class PhaseTrajectory:
    """Sampled amplitudes and continuous (unwrapped) phases."""

    times: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    topology: Topology

    def state(self, k: int) -> PhaseState:
        return PhaseState(self.r[k].copy(), self.phi[k].copy())

    def to_complex(self) -> np.ndarray:
        return self.r * np.exp(1j * self.phi)


@dataclass(frozen=True)
class SyncReport:
    tau_sync: Optional[float]
    tau_dec: float
    z_series: np.ndarray
    verdict: SyncVerdict
    threshold: float


class PhaseModel(Protocol):
    topology: Topology

    def rhs(self, r: np.ndarray, phi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]: ...

    def rhs_cartesian(self, z: np.ndarray) -> np.ndarray: ...

    def row_norm(self, size: int) -> float: ...


class BarePhaseModel:
    """Star network in amplitude-phase form; the drive acts on mode 0 only."""

    topology = Topology.STAR_BARE

    def __init__(self, params: SystemParams):
        derived = derived_params(params)
        self.n_modes = params.n_modes
        self.delta0 = derived.delta0
        self.delta = derived.delta
        self.gamma0 = params.gamma0
        self.gamma = params.gamma
        self.link = params.coupling / math.sqrt(params.n_modes)
        self.theta = params.theta
        self.drive = params.drive
        self.link_phasor = params.coupling_phasor / math.sqrt(params.n_modes)
        self._row_norm = float(np.abs(build_evolution_matrix(params)).sum(axis=1).max())

    def row_norm(self, size: int) -> float:
        return self._row_norm

    def rhs(self, r: np.ndarray, phi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        r0, phi0 = r[0], phi[0]
        rj, phij = r[1:], phi[1:]
        dr = np.empty_like(r)
        dphi = np.empty_like(phi)

        towards_aux = self.theta + phij - phi0
        dr[0] = -self.gamma0 * r0 + self.link * np.sum(rj * np.sin(towards_aux)) + self.drive * math.cos(phi0)
        dphi[0] = (
            -self.delta0
            - self.link * np.sum(rj * np.cos(towards_aux)) / r0
            - self.drive * math.sin(phi0) / r0
        )

        towards_main = self.theta + phi0 - phij
        dr[1:] = -self.gamma * rj + self.link * r0 * np.sin(towards_main)
        dphi[1:] = -self.delta - self.link * (r0 / rj) * np.cos(towards_main)
        return dr, dphi

    def rhs_cartesian(self, z: np.ndarray) -> np.ndarray:
        dz = np.empty_like(z)
        dz[0] = -1j * (complex(self.delta0, -self.gamma0) * z[0] + self.link_phasor * np.sum(z[1:])) + self.drive
        dz[1:] = -1j * (complex(self.delta, -self.gamma) * z[1:] + self.link_phasor * z[0])
        return dz


class CollectivePhaseModel:
    """All-to-all collective modes ``1..N`` with uniform drive ``-eta~ e^{i theta_D}``."""

    topology = Topology.ALL_TO_ALL_COLLECTIVE

    def __init__(self, eff: EffectiveParams):
        self.eff = eff

    def row_norm(self, size: int) -> float:
        return abs(self.eff.level) + abs(self.eff.coupling_phasor) * (size - 1) / size

    def rhs(self, r: np.ndarray, phi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        eff = self.eff
        n = r.shape[0]
        amplitudes = r * np.exp(1j * phi)
        others = np.sum(amplitudes) - amplitudes
        # Mean-field sum over j != i, rotated into the frame of mode i.
        pull = -1j * (eff.coupling_phasor / n) * others * np.exp(-1j * phi)
        drive_angle = eff.theta_drive - phi
        dr = -eff.gamma_eff * r + pull.real - eff.eta_eff * np.cos(drive_angle)
        dphi = -eff.delta_eff + pull.imag / r - eff.eta_eff * np.sin(drive_angle) / r
        return dr, dphi

    def rhs_cartesian(self, z: np.ndarray) -> np.ndarray:
        eff = self.eff
        n = z.shape[0]
        others = np.sum(z) - z
        return -1j * (eff.level * z + (eff.coupling_phasor / n) * others) - eff.drive_phasor


def rhs_bare(state: PhaseState, params: SystemParams) -> Tuple[np.ndarray, np.ndarray]:
    """Return ``(dr/dt, dphi/dt)`` for the star network."""
    return BarePhaseModel(params).rhs(np.asarray(state.r, float), np.asarray(state.phi, float))


def rhs_collective(state: PhaseState, eff: EffectiveParams) -> Tuple[np.ndarray, np.ndarray]:
    return CollectivePhaseModel(eff).rhs(np.asarray(state.r, float), np.asarray(state.phi, float))


def _polar_step(model: PhaseModel, r: np.ndarray, phi: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    k1r, k1p = model.rhs(r, phi)
    k2r, k2p = model.rhs(r + 0.5 * dt * k1r, phi + 0.5 * dt * k1p)
    k3r, k3p = model.rhs(r + 0.5 * dt * k2r, phi + 0.5 * dt * k2p)
    k4r, k4p = model.rhs(r + dt * k3r, phi + dt * k3p)
    r_next = r + dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r)
    phi_next = phi + dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
    return r_next, phi_next


def _cartesian_step(model: PhaseModel, r: np.ndarray, phi: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    z = r * np.exp(1j * phi)
    k1 = model.rhs_cartesian(z)
    k2 = model.rhs_cartesian(z + 0.5 * dt * k1)
    k3 = model.rhs_cartesian(z + 0.5 * dt * k2)
    k4 = model.rhs_cartesian(z + dt * k3)
    z_next = z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    # Keep phases continuous across the switch.
    phi_next = phi + wrap_angle(np.angle(z_next) - phi)
    return np.abs(z_next), phi_next


def integrate(
    model: PhaseModel,
    state0: PhaseState,
    dt: float,
    n_steps: int,
    record_every: int = 1,
    allow_cartesian: bool = True,
) -> PhaseTrajectory:
    """Fixed-step RK4 on the amplitude-phase equations.

    Each step of ``dt`` is split into equal substeps no longer than
    ``max_stable_step(model, size)``, so the recorded grid stays ``k * dt``.
    Substeps whose smallest amplitude falls under ``1e-12 * max(r)`` are taken
    in Cartesian form when ``allow_cartesian`` is set.
    """
    if not dt > 0:
        raise ParameterError("dt must be > 0")
    if n_steps < 0 or record_every < 1:
        raise ParameterError("n_steps must be >= 0 and record_every >= 1")
    r = np.asarray(state0.r, dtype=float).copy()
    phi = np.asarray(state0.phi, dtype=float).copy()

    limit = max_stable_step(model, r.size)
    substeps = max(1, math.ceil(dt / limit)) if math.isfinite(limit) else 1
    h = dt / substeps
    if substeps > 1:
        logger.debug(f"dt={dt:g} exceeds the stable step {limit:g}; using {substeps} substeps of {h:g}")

    n_records = n_steps // record_every + 1
    times = np.empty(n_records)
    r_out = np.empty((n_records, r.size))
    phi_out = np.empty((n_records, phi.size))
    times[0], r_out[0], phi_out[0] = 0.0, r, phi

    cartesian_steps = 0
    for step in range(1, n_steps + 1):
        for _ in range(substeps):
            floor = AMPLITUDE_FLOOR * max(float(r.max()), np.finfo(float).tiny)
            if r.min() <= floor:
                if not allow_cartesian:
                    raise SingularAmplitudeError("amplitude reached the polar floor", step=step)
                r, phi = _cartesian_step(model, r, phi, h)
                cartesian_steps += 1
            else:
                r, phi = _polar_step(model, r, phi, h)
            if not (np.all(np.isfinite(r)) and np.all(np.isfinite(phi))):
                raise NumericalFailureError("non-finite amplitude or phase", step=step)
        if step % record_every == 0:
            k = step // record_every
            times[k], r_out[k], phi_out[k] = step * dt, r, phi
    if cartesian_steps:
        logger.info(f"{cartesian_steps} of {n_steps * substeps} steps used the Cartesian fallback")
    return PhaseTrajectory(times, r_out, phi_out, model.topology)


def max_stable_step(model: PhaseModel, size: int) -> float:
    """Largest RK4 step allowed for ``model``: ``STEP_SCALE / max_i sum_j |H_ij|``."""
    norm = model.row_norm(size)
    return STEP_SCALE / norm if norm > 0 else math.inf


def as_phase_trajectory(traj: Trajectory, topology: Topology = Topology.STAR_BARE) -> PhaseTrajectory:
    """Polar view of a complex trajectory with phases unwrapped in time."""
    return PhaseTrajectory(traj.times, traj.amplitudes(), traj.phases(), topology)


def phase_coherence(phases: Union[np.ndarray, Sequence[float]]) -> float:
    """Order parameter ``z = |mean(exp(i phi))|``."""
    values = np.asarray(phases, dtype=float)
    if values.size == 0:
        raise ParameterError("phase_coherence needs at least one phase")
    return float(min(1.0, abs(np.mean(np.exp(1j * values)))))


def coherence_series(traj: PhaseTrajectory, first_mode: int = 1) -> np.ndarray:
    """Order parameter over modes ``first_mode..`` at every sample."""
    return np.minimum(1.0, np.abs(np.mean(np.exp(1j * traj.phi[:, first_mode:]), axis=1)))


def lock_times(
    traj: PhaseTrajectory, threshold: float = SYNC_THRESHOLD, reference: int = 0
) -> np.ndarray:
    """Per mode, the first sample time after which ``|phi_j - phi_ref|`` stays under ``threshold``.

    Modes still unlocked at the last sample get NaN. The reference is skipped.
    """
    if traj.phi.shape[1] < 2:
        raise ParameterError("need at least one mode besides the reference")
    others = [j for j in range(traj.phi.shape[1]) if j != reference]
    diff = wrap_angle(traj.phi[:, others] - traj.phi[:, [reference]])
    locked = np.abs(diff) <= threshold
    out = np.full(len(others), math.nan)
    for k, column in enumerate(locked.T):
        if not column[-1]:
            continue
        unlocked = np.flatnonzero(~column)
        out[k] = traj.times[0 if unlocked.size == 0 else int(unlocked[-1]) + 1]
    return out


def estimate_sync_time(
    traj: PhaseTrajectory, threshold: float = SYNC_THRESHOLD, reference: int = 0
) -> Optional[float]:
    """Mean of ``lock_times`` over modes, or None when any mode is still unlocked at the end."""
    times = lock_times(traj, threshold, reference)
    if np.any(np.isnan(times)):
        return None
    return float(np.mean(times))


def sync_report(
    traj: PhaseTrajectory, params: SystemParams, threshold: float = SYNC_THRESHOLD
) -> SyncReport:
    """Compare the locking time with the main-mode decay time ``1/gamma``."""
    tau_dec = 1.0 / params.gamma if params.gamma > 0 else math.inf
    tau_sync = estimate_sync_time(traj, threshold)
    if tau_sync is None:
        verdict = SyncVerdict.DESYNCHRONIZED
    elif tau_sync <= tau_dec or params.is_driven:
        verdict = SyncVerdict.SYNCHRONIZED
    else:
        verdict = SyncVerdict.DECAYED_FIRST
    return SyncReport(tau_sync, tau_dec, coherence_series(traj), verdict, threshold)


def amplitude_ratio_spread(traj: PhaseTrajectory, reference: int = 1) -> float:
    """Largest relative excursion of ``r_j / r_ref`` over the second half of the run."""
    late = traj.r[traj.r.shape[0] // 2 :]
    ref = late[:, reference]
    if np.any(ref <= 0):
        return math.inf
    ratios = late / ref[:, None]
    mean = np.mean(ratios, axis=0)
    spread = (ratios.max(axis=0) - ratios.min(axis=0)) / np.where(mean > 0, mean, 1.0)
    return float(spread.max())


@dataclass(frozen=True)
class SyncSweep:
    """Mean locking time per grid point over a shared set of initial states."""

    axis: str
    values: np.ndarray
    tau_sync: np.ndarray
    tau_sem: np.ndarray
    n_initial: int
    slope: float
    intercept: float
    r_squared: float

    @property
    def inverse_tau(self) -> np.ndarray:
        return 1.0 / self.tau_sync


def _sweep_point(params: SystemParams, axis: str, value: float) -> SystemParams:
    if axis == "coupling":
        return params.replace(coupling=float(value))
    if axis == "sin_theta":
        if not 0 < value <= 1:
            raise ParameterError("sin_theta values must lie in (0, 1]")
        theta = math.asin(value)
        point = params.replace(theta=theta)
        if point.is_driven:
            return point.replace(drive_freq=solve_drive_frequency(point))
        # Stay on the undriven locus: dw = -dg * cot(theta).
        dg = params.gamma0 - params.gamma
        return point.replace(omega0=params.omega - dg * math.cos(theta) / value)
    raise ParameterError(f"unknown sweep axis '{axis}'")


def sweep_sync_time(
    params: SystemParams,
    axis: str,
    values: Sequence[float],
    times: np.ndarray,
    initial_states: np.ndarray,
    threshold: float = SYNC_THRESHOLD,
) -> SyncSweep:
    """Locking time along a parameter axis plus a linear fit of ``1/tau`` against it.

    ``initial_states`` is one state or a ``(k, N+1)`` stack. Every grid point
    runs all k starts and reports their mean locking time with its standard
    error; a point counts as locked only when every start locks.
    """
    grid = np.asarray(values, dtype=float)
    starts = np.atleast_2d(np.asarray(initial_states, dtype=complex))
    taus = np.full(grid.size, math.nan)
    sems = np.full(grid.size, math.nan)
    for k, value in enumerate(grid):
        point = _sweep_point(params, axis, value)
        per_start = []
        for a0 in starts:
            tau = estimate_sync_time(as_phase_trajectory(evolve_linear(point, a0, times)), threshold)
            if tau is None or tau <= 0:
                break
            per_start.append(tau)
        if len(per_start) < len(starts):
            logger.warning(f"no locking for {axis}={value:g}")
            continue
        taus[k] = float(np.mean(per_start))
        if len(per_start) > 1:
            sems[k] = float(np.std(per_start, ddof=1) / math.sqrt(len(per_start)))
    finite = np.isfinite(taus)
    if finite.sum() >= 3:
        fit = linregress(grid[finite], 1.0 / taus[finite])
        slope, intercept, r_squared = float(fit.slope), float(fit.intercept), float(fit.rvalue**2)
    else:
        slope = intercept = r_squared = math.nan
    return SyncSweep(axis, grid, taus, sems, len(starts), slope, intercept, r_squared)
