"""Collective (Kuramoto-like) representation of the star network.

``U = V S T`` removes the auxiliary mode: the isolated bright eigenvalue sits
alone at index 0 and the remaining ``N`` collective modes couple all-to-all
with ``(g~ e^{i theta~} / N)`` and are driven with ``eta~ e^{i theta_D}``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from nonhermitian_sync.basis import fourier_transform, mixer_matrix, shear_matrix
from nonhermitian_sync.errors import ExceptionalPointError, ParameterError, TransformError, UndampedSystemError
from nonhermitian_sync.params import (
    Branch,
    DerivedParams,
    SystemParams,
    build_evolution_matrix,
    derived_params,
    wrap_angle,
)
from nonhermitian_sync.propagator import Trajectory, spectrum

logger = logging.getLogger(__name__)

INVERSE_TOL = 1e-9


@dataclass(frozen=True)
class KuramotoTransform:
    t_matrix: np.ndarray
    s_matrix: np.ndarray
    v_matrix: np.ndarray
    u_matrix: np.ndarray
    u_inverse: np.ndarray
    branch: Branch
    shear: complex

    @property
    def n_modes(self) -> int:
        return int(self.u_matrix.shape[0] - 1)


@dataclass(frozen=True)
class EffectiveParams:
    """Parameters of the all-to-all collective model on modes ``1..N``."""

    g_eff: float
    theta_eff: float
    delta_eff: float
    gamma_eff: float
    delta0_eff: float
    gamma0_eff: float
    eta_eff: float
    theta_drive: float
    branch: Branch

    @property
    def coupling_phasor(self) -> complex:
        return complex(self.g_eff * np.exp(1j * self.theta_eff))

    @property
    def drive_phasor(self) -> complex:
        return complex(self.eta_eff * np.exp(1j * self.theta_drive))

    @property
    def level(self) -> complex:
        return complex(self.delta_eff, -self.gamma_eff)


def select_branch(derived: DerivedParams) -> Branch:
    """Isolate the bright eigenvalue with the most negative imaginary part.

    This is not always the branch whose shear stays finite as ``g -> 0``; pass
    ``Branch.PLUS`` explicitly to follow the bare basis in that limit.
    """
    plus = derived.relative_level(Branch.PLUS)
    minus = derived.relative_level(Branch.MINUS)
    return Branch.PLUS if plus.imag <= minus.imag else Branch.MINUS


def _resolve(params: SystemParams, branch: Branch) -> Tuple[DerivedParams, Branch]:
    derived = derived_params(params)
    if derived.ep_flag:
        raise ExceptionalPointError("the collective transform is singular at an exceptional point")
    branch = Branch(branch)
    if branch is Branch.AUTO:
        branch = select_branch(derived)
        logger.debug(f"auto branch resolved to {branch.value}")
    return derived, branch


def build_transform(params: SystemParams, branch: Branch = Branch.AUTO) -> KuramotoTransform:
    """Build ``U = V S T`` and its numerically checked inverse."""
    derived, branch = _resolve(params, branch)
    s = derived.shear(branch)
    if not np.isfinite(s):
        raise TransformError(f"shear for the {branch.value} branch diverges")
    n = params.n_modes
    t_matrix = fourier_transform(n)
    s_matrix = shear_matrix(n, s)
    v_matrix = mixer_matrix(n)
    u_matrix = v_matrix @ s_matrix @ t_matrix
    identity = np.eye(n + 1, dtype=complex)
    try:
        u_inverse = np.linalg.solve(u_matrix, identity)
    except np.linalg.LinAlgError as e:
        raise TransformError(f"collective transform is singular: {e}") from e
    residual = float(np.max(np.abs(u_matrix @ u_inverse - identity)))
    if not residual <= INVERSE_TOL:
        raise TransformError(f"collective transform inverse residual {residual:.3g}")
    return KuramotoTransform(t_matrix, s_matrix, v_matrix, u_matrix, u_inverse, branch, s)


def effective_parameters(params: SystemParams, branch: Branch = Branch.AUTO) -> EffectiveParams:
    derived, branch = _resolve(params, branch)
    other = Branch.MINUS if branch is Branch.PLUS else Branch.PLUS
    collective = derived.relative_level(other)
    isolated = derived.main_level + derived.relative_level(branch)
    level = derived.main_level + collective / params.n_modes
    s = derived.shear(branch)
    drive_term = params.drive * s
    return EffectiveParams(
        g_eff=abs(collective),
        theta_eff=wrap_angle(np.angle(collective)) if collective != 0 else 0.0,
        delta_eff=level.real,
        gamma_eff=-level.imag,
        delta0_eff=isolated.real,
        gamma0_eff=-isolated.imag,
        eta_eff=abs(drive_term),
        theta_drive=wrap_angle(np.angle(drive_term)) if params.drive > 0 else 0.0,
        branch=branch,
    )


def assemble_collective_matrix(params: SystemParams, transform: KuramotoTransform) -> np.ndarray:
    """``M = U H U^-1`` evaluated numerically."""
    _check_size(params, transform)
    return transform.u_matrix @ build_evolution_matrix(params) @ transform.u_inverse


def closed_form_collective_matrix(params: SystemParams, transform: KuramotoTransform) -> np.ndarray:
    """``M`` built directly from the effective parameters."""
    _check_size(params, transform)
    eff = effective_parameters(params, transform.branch)
    n = params.n_modes
    matrix = np.zeros((n + 1, n + 1), dtype=complex)
    matrix[0, 0] = complex(eff.delta0_eff, -eff.gamma0_eff)
    matrix[1:, 1:] = eff.coupling_phasor / n
    main_level = derived_params(params).main_level
    matrix[np.arange(1, n + 1), np.arange(1, n + 1)] = main_level + eff.coupling_phasor / n
    return matrix


def collective_drive(params: SystemParams, transform: KuramotoTransform) -> np.ndarray:
    """Transformed drive vector ``U u = e_0 - s (0, 1, ..., 1)``."""
    _check_size(params, transform)
    return transform.u_matrix[:, 0].copy()


def to_collective(states: np.ndarray, transform: KuramotoTransform) -> np.ndarray:
    """Map bare amplitudes (one state or a stack of states) to collective ones."""
    values = np.asarray(states, dtype=complex)
    if values.shape[-1] != transform.n_modes + 1:
        raise ParameterError("state dimension does not match the transform")
    return values @ transform.u_matrix.T


def from_collective(states: np.ndarray, transform: KuramotoTransform) -> np.ndarray:
    values = np.asarray(states, dtype=complex)
    if values.shape[-1] != transform.n_modes + 1:
        raise ParameterError("state dimension does not match the transform")
    return values @ transform.u_inverse.T


def collective_trajectory(traj: Trajectory, transform: KuramotoTransform) -> Trajectory:
    return Trajectory(traj.times, to_collective(traj.states, transform), traj.frame)


def collective_steady_states(
    params: SystemParams, transform: KuramotoTransform
) -> Tuple[complex, complex]:
    """Return ``(pi_0, pi_sync)``, the stationary isolated and collective amplitudes."""
    _check_size(params, transform)
    if not params.is_driven:
        return 0j, 0j
    spec = spectrum(params)
    if spec.max_decay_imag >= 0:
        raise UndampedSystemError("collective steady state needs a strictly damped spectrum")
    derived = derived_params(params)
    other = Branch.MINUS if transform.branch is Branch.PLUS else Branch.PLUS
    isolated = derived.main_level + derived.relative_level(transform.branch)
    collective = derived.main_level + derived.relative_level(other)
    pi0 = -1j * params.drive / isolated
    pi_sync = 1j * transform.shear * params.drive / collective
    return complex(pi0), complex(pi_sync)


def _check_size(params: SystemParams, transform: KuramotoTransform) -> None:
    if transform.n_modes != params.n_modes:
        raise ParameterError(
            f"transform built for N={transform.n_modes}, parameters have N={params.n_modes}"
        )


def effective_summary(params: SystemParams, branch: Branch = Branch.AUTO) -> dict:
    """Summary of the effective model, suitable for JSON output."""
    eff = effective_parameters(params, branch)
    return {
        "branch": eff.branch.value,
        "g_eff": eff.g_eff,
        "theta_eff": eff.theta_eff,
        "theta_eff_over_pi": eff.theta_eff / math.pi,
        "delta_eff": eff.delta_eff,
        "gamma_eff": eff.gamma_eff,
        "delta0_eff": eff.delta0_eff,
        "gamma0_eff": eff.gamma0_eff,
        "eta_eff": eff.eta_eff,
        "theta_drive": eff.theta_drive,
    }
