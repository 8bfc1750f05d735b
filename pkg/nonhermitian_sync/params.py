"""System parameters, the evolution matrix and closed-form synchronization conditions.

The model is one auxiliary mode (index 0) coupled to ``N`` identical main
modes (indices ``1..N``) through a complex coupling ``g e^{i theta}``:

    dA/dt = -i H A + eta * u,    u = (1, 0, ..., 0)

written in a frame rotating at the drive frequency ``Omega`` (``Omega = 0``
for undriven systems).
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Tuple

import numpy as np

from nonhermitian_sync.errors import ConditionError, ParameterError

logger = logging.getLogger(__name__)

CONDITION_TOL = 1e-9
EP_THRESHOLD = 1e-10

TWO_PI = 2.0 * math.pi


def wrap_angle(x: Any) -> Any:
    """Wrap angles into (-pi, pi]."""
    wrapped = math.pi - np.mod(math.pi - np.asarray(x, dtype=float), TWO_PI)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


class Branch(str, Enum):
    """Eigenvalue branch isolated by the collective basis change."""

    PLUS = "plus"
    MINUS = "minus"
    AUTO = "auto"


class SyncMode(str, Enum):
    DRIVEN = "driven"
    UNDRIVEN = "undriven"


class Verdict(str, Enum):
    SYNCHRONIZES = "synchronizes"
    ANTI_SYNCHRONIZES = "anti_synchronizes"
    FAILS = "fails"


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the star network.

    Frequencies are lab-frame values; ``drive_freq`` is only meaningful when
    ``drive > 0``.
    """

    n_modes: int
    omega0: float
    gamma0: float
    omega: float
    gamma: float
    coupling: float
    theta: float = 0.0
    drive: float = 0.0
    drive_freq: float = 0.0

    def __post_init__(self) -> None:
        problems = []
        if isinstance(self.n_modes, bool) or not isinstance(self.n_modes, (int, np.integer)):
            problems.append("n_modes must be an integer")
        elif self.n_modes < 1:
            problems.append("n_modes must be >= 1")
        for name in ("omega0", "gamma0", "omega", "gamma", "coupling", "theta", "drive", "drive_freq"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or isinstance(value, bool):
                problems.append(f"{name} must be a real number")
            elif not math.isfinite(value):
                problems.append(f"{name} must be finite")
        if problems:
            raise ParameterError("; ".join(problems))
        for name in ("gamma0", "gamma", "coupling", "drive"):
            if getattr(self, name) < 0:
                problems.append(f"{name} must be >= 0")
        if not -math.pi < self.theta <= math.pi:
            problems.append("theta must lie in (-pi, pi]")
        if problems:
            raise ParameterError("; ".join(problems))

    @property
    def is_driven(self) -> bool:
        return self.drive > 0

    @property
    def frame_freq(self) -> float:
        """Rotating-frame frequency: the drive frequency, or 0 without drive."""
        return float(self.drive_freq) if self.is_driven else 0.0

    @property
    def coupling_phasor(self) -> complex:
        return complex(self.coupling * np.exp(1j * self.theta))

    def replace(self, **changes: Any) -> "SystemParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class DerivedParams:
    """Frame detunings, bright-pair splitting and the branch shears."""

    delta0: float
    delta: float
    dw: float
    dg: float
    mu: complex
    s_plus: complex
    s_minus: complex
    ep_flag: bool
    main_level: complex

    @property
    def half_split(self) -> complex:
        """``b = (dw - i dg) / 2``."""
        return complex(self.dw, -self.dg) / 2

    def shear(self, branch: Branch) -> complex:
        if Branch(branch) is Branch.AUTO:
            raise ParameterError("resolve the auto branch before asking for its shear")
        return self.s_plus if Branch(branch) is Branch.PLUS else self.s_minus

    def relative_level(self, branch: Branch) -> complex:
        """Eigenvalue of the requested bright branch relative to ``main_level``."""
        sign = 1 if Branch(branch) is Branch.PLUS else -1
        return self.half_split + sign * self.mu


def _shears(b: complex, mu: complex, c: complex) -> Tuple[complex, complex]:
    # Divide by the larger of b +/- mu so s_plus * s_minus == -1 stays exact.
    near, far = b + mu, b - mu
    if near == 0 and far == 0:
        return complex(math.nan, math.nan), complex(math.nan, math.nan)
    if abs(near) >= abs(far):
        s_plus = c / near
        s_minus = -near / c if c != 0 else complex(math.inf, 0.0)
    else:
        s_minus = c / far
        s_plus = -far / c if c != 0 else complex(math.inf, 0.0)
    return s_plus, s_minus


def derived_params(params: SystemParams) -> DerivedParams:
    """Compute detunings, ``mu``, both shears and the exceptional-point flag."""
    frame = params.frame_freq
    delta0 = params.omega0 - frame
    delta = params.omega - frame
    dw = delta0 - delta
    dg = params.gamma0 - params.gamma
    c = params.coupling_phasor
    b = complex(dw, -dg) / 2
    mu = complex(np.sqrt(complex(b * b + c * c)))
    if mu.real == 0 and mu.imag < 0:
        mu = -mu
    scale = max(abs(dw), abs(dg), params.coupling, 1.0)
    ep_flag = abs(mu) < EP_THRESHOLD * scale
    s_plus, s_minus = _shears(b, mu, c)
    return DerivedParams(
        delta0=delta0,
        delta=delta,
        dw=dw,
        dg=dg,
        mu=mu,
        s_plus=s_plus,
        s_minus=s_minus,
        ep_flag=ep_flag,
        main_level=complex(delta, -params.gamma),
    )


def build_evolution_matrix(
    params: SystemParams, main_freqs: Optional[np.ndarray] = None
) -> np.ndarray:
    """Assemble the ``(N+1) x (N+1)`` non-Hermitian evolution matrix ``H``.

    ``main_freqs`` overrides the lab-frame frequency of each main mode and is
    used by the disorder experiments.
    """
    n = params.n_modes
    frame = params.frame_freq
    matrix = np.zeros((n + 1, n + 1), dtype=complex)
    matrix[0, 0] = complex(params.omega0 - frame, -params.gamma0)
    if main_freqs is None:
        levels = np.full(n, complex(params.omega - frame, -params.gamma))
    else:
        freqs = np.asarray(main_freqs, dtype=float)
        if freqs.shape != (n,):
            raise ParameterError(f"main_freqs must have shape ({n},), got {freqs.shape}")
        levels = (freqs - frame) - 1j * params.gamma
    matrix[np.arange(1, n + 1), np.arange(1, n + 1)] = levels
    link = params.coupling_phasor / math.sqrt(n)
    matrix[0, 1:] = link
    matrix[1:, 0] = link
    return matrix


def exceptional_point_locus(
    coupling: float, theta: float
) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Return the two ``(dw, dg)`` points where the bright pair coalesces."""
    if coupling < 0:
        raise ParameterError("coupling must be >= 0")
    dw = 2.0 * coupling * math.sin(theta)
    dg = 2.0 * coupling * math.cos(theta)
    return (-dw, -dg), (dw, dg)


@dataclass(frozen=True)
class ConditionReport:
    residual_imag: float
    inequality_ok: bool
    verdict: Verdict
    branch_note: str = ""


def _verdict(residual: float, inequality_ok: bool, tol: float) -> Verdict:
    if abs(residual) > tol:
        return Verdict.FAILS
    return Verdict.SYNCHRONIZES if inequality_ok else Verdict.ANTI_SYNCHRONIZES


def sync_condition_undriven(params: SystemParams, tol: float = CONDITION_TOL) -> ConditionReport:
    """Evaluate the undriven phase-locking condition.

    The verdict follows the closed-form inequality. When the auxiliary mode
    decays faster than the main modes (``dg > 0``) the long-lived eigenmode is
    the other bright branch; its true relative sign goes into ``branch_note``.
    """
    if params.is_driven:
        raise ConditionError("undriven condition requested for a driven system")
    derived = derived_params(params)
    sin_t, cos_t = math.sin(params.theta), math.cos(params.theta)
    residual = derived.dw * sin_t + derived.dg * cos_t
    inequality_ok = derived.dg * sin_t < derived.dw * cos_t
    verdict = _verdict(residual, inequality_ok, tol)

    note = ""
    if verdict is not Verdict.FAILS:
        if abs(sin_t) <= tol:
            note = "Hermitian coupling: bright decay rates are degenerate and the locking time diverges"
        else:
            locks_in_phase = sin_t > 0
            if locks_in_phase != (verdict is Verdict.SYNCHRONIZES):
                sign = "in phase" if locks_in_phase else "in anti-phase"
                note = (
                    "auxiliary mode decays faster than the main modes; "
                    f"the surviving eigenmode locks {sign}"
                )
    if note:
        logger.info(note)
    return ConditionReport(float(residual), bool(inequality_ok), verdict, note)


def sync_condition_driven(params: SystemParams, tol: float = CONDITION_TOL) -> ConditionReport:
    """Evaluate the driven steady-state phase-locking condition."""
    if not params.is_driven:
        raise ConditionError("driven condition requested for an undriven system")
    detuning = params.omega - params.drive_freq
    sin_t, cos_t = math.sin(params.theta), math.cos(params.theta)
    residual = detuning * sin_t + params.gamma * cos_t
    inequality_ok = detuning * cos_t < params.gamma * sin_t
    return ConditionReport(float(residual), bool(inequality_ok), _verdict(residual, inequality_ok, tol))


def solve_sync_angle(params: SystemParams, mode: SyncMode) -> float:
    """Return the coupling phase in (-pi, pi] that puts ``params`` on the sync branch."""
    mode = SyncMode(mode)
    if mode is SyncMode.UNDRIVEN:
        derived = derived_params(params)
        x, y = derived.dw, derived.dg

        def holds(theta: float) -> bool:
            return y * math.sin(theta) < x * math.cos(theta)

    else:
        x, y = params.omega - params.drive_freq, params.gamma

        def holds(theta: float) -> bool:
            return x * math.cos(theta) < y * math.sin(theta)

    if x == 0 and y == 0:
        raise ConditionError("condition vacuous: both coefficients vanish")

    base = math.atan2(-y, x)
    for candidate in (base, base + math.pi):
        theta = wrap_angle(candidate)
        if holds(theta):
            return theta
    raise ConditionError("no coupling phase satisfies the synchronization inequality")


def solve_drive_frequency(params: SystemParams) -> float:
    """Drive frequency that satisfies the driven condition at ``params.theta``."""
    sin_t = math.sin(params.theta)
    if sin_t <= CONDITION_TOL:
        raise ConditionError("driven sync needs sin(theta) > 0")
    if params.gamma <= 0:
        raise ConditionError("driven sync needs gamma > 0")
    return params.omega + params.gamma * math.cos(params.theta) / sin_t
