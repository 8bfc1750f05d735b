"""Adiabatic elimination of a strongly damped mediator mode.

Two modes couple to a third mode with detuning ``Omega`` and damping ``Gamma``.
Eliminating the mediator leaves an effective two-mode system whose coupling
picks up a dissipative (imaginary) part.

The closed forms drop terms of order ``omega_i / Gamma``. They can be applied in
a frame rotating at ``frame``, where the mediator detuning is ``Omega - frame``
and the dropped terms shrink to ``(omega_i - frame) / Gamma``. Effective
frequencies are always reported in the lab frame.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eigvals
from scipy.optimize import linear_sum_assignment

from nonhermitian_sync.errors import ParameterError

logger = logging.getLogger(__name__)

AMBIGUITY_TOL = 1e-12


@dataclass(frozen=True)
class ThreeModeParams:
    omega1: float
    omega2: float
    omega_aux: float
    gamma1: float
    gamma2: float
    gamma_aux: float
    g1: complex
    g2: complex

    def __post_init__(self) -> None:
        problems = []
        for name in ("omega1", "omega2", "omega_aux", "gamma1", "gamma2", "gamma_aux"):
            if not math.isfinite(getattr(self, name)):
                problems.append(f"{name} must be finite")
        if self.gamma1 < 0 or self.gamma2 < 0:
            problems.append("gamma1 and gamma2 must be >= 0")
        if not self.gamma_aux > 0:
            problems.append("gamma_aux must be > 0")
        if problems:
            raise ParameterError("; ".join(problems))

    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [complex(self.omega1, -self.gamma1), 0, self.g1],
                [0, complex(self.omega2, -self.gamma2), self.g2],
                [np.conj(self.g1), np.conj(self.g2), complex(self.omega_aux, -self.gamma_aux)],
            ],
            dtype=complex,
        )

    def with_detuning(self, delta: float) -> "ThreeModeParams":
        """Place mode 1 at ``omega2 + delta``."""
        return replace(self, omega1=self.omega2 + delta)


@dataclass(frozen=True)
class TwoModeEffective:
    omega_eff: tuple
    gamma_eff: tuple
    g12: complex
    g21: complex
    approx_gamma_eff: tuple
    approx_g12: complex
    approx_g21: complex

    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [complex(self.omega_eff[0], -self.gamma_eff[0]), self.g12],
                [self.g21, complex(self.omega_eff[1], -self.gamma_eff[1])],
            ],
            dtype=complex,
        )

    @property
    def approx_deviation(self) -> float:
        """Largest gap between the full expressions and their ``Omega -> 0`` forms."""
        gaps = [
            abs(self.g12 - self.approx_g12),
            abs(self.g21 - self.approx_g21),
            abs(self.gamma_eff[0] - self.approx_gamma_eff[0]),
            abs(self.gamma_eff[1] - self.approx_gamma_eff[1]),
        ]
        return float(max(gaps))


def effective_two_mode(p: ThreeModeParams, frame: float = 0.0) -> TwoModeEffective:
    detuning = p.omega_aux - frame
    d = detuning**2 + p.gamma_aux**2
    w1, w2 = abs(p.g1) ** 2, abs(p.g2) ** 2
    mediator = complex(detuning, p.gamma_aux)
    return TwoModeEffective(
        omega_eff=(p.omega1 - w1 * detuning / d, p.omega2 - w2 * detuning / d),
        gamma_eff=(p.gamma1 + w1 * p.gamma_aux / d, p.gamma2 + w2 * p.gamma_aux / d),
        g12=complex(-p.g1 * mediator * np.conj(p.g2) / d),
        g21=complex(-p.g2 * mediator * np.conj(p.g1) / d),
        approx_gamma_eff=(p.gamma1 + w1 / p.gamma_aux, p.gamma2 + w2 / p.gamma_aux),
        approx_g12=complex(-1j * p.g1 * np.conj(p.g2) / p.gamma_aux),
        approx_g21=complex(-1j * p.g2 * np.conj(p.g1) / p.gamma_aux),
    )


def regime_ratio(p: ThreeModeParams) -> float:
    """How strongly the mediator damping dominates every other rate; elimination needs this large."""
    scale = max(
        abs(p.omega_aux), abs(p.omega1), abs(p.omega2), p.gamma1, p.gamma2, abs(p.g1), abs(p.g2)
    )
    return float(p.gamma_aux / scale) if scale > 0 else math.inf


@dataclass(frozen=True)
class SpectrumComparison:
    delta: np.ndarray
    exact: np.ndarray
    effective: np.ndarray
    ambiguous: np.ndarray
    max_real_deviation: float
    max_imag_deviation: float

    @property
    def max_deviation(self) -> float:
        return max(self.max_real_deviation, self.max_imag_deviation)


def _slow_pair(p: ThreeModeParams, frame: float) -> tuple:
    exact = eigvals(p.matrix())
    exact = np.delete(exact, int(np.argmin(exact.imag)))
    reduced = eigvals(effective_two_mode(p, frame).matrix())
    reduced = reduced[np.lexsort((reduced.imag, reduced.real))]
    cost = np.abs(exact[:, None] - reduced[None, :])
    rows, cols = linear_sum_assignment(cost)
    matched = np.empty(2, dtype=complex)
    matched[cols] = exact[rows]
    straight = cost[0, 0] + cost[1, 1]
    crossed = cost[0, 1] + cost[1, 0]
    ambiguous = abs(straight - crossed) <= AMBIGUITY_TOL * max(1.0, float(np.abs(reduced).max()))
    return matched, reduced, ambiguous


def compare_spectra(
    p: ThreeModeParams, delta_grid: Sequence[float], frame: Optional[float] = None
) -> SpectrumComparison:
    """Exact slow eigenvalues of the three-mode system against the effective pair.

    The effective pair is built in the frame co-rotating with mode 2 unless
    ``frame`` is given; ``frame=0.0`` uses the lab-frame closed forms.
    """
    frame = p.omega2 if frame is None else float(frame)
    grid = np.asarray(delta_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ParameterError("delta grid must be a non-empty 1-D sequence")
    ratio = regime_ratio(p)
    if ratio < 3.0:
        logger.warning(f"regime ratio {ratio:.3g} is small; elimination may be inaccurate")
    exact = np.empty((grid.size, 2), dtype=complex)
    effective = np.empty((grid.size, 2), dtype=complex)
    ambiguous = np.zeros(grid.size, dtype=bool)
    for k, delta in enumerate(grid):
        exact[k], effective[k], ambiguous[k] = _slow_pair(p.with_detuning(float(delta)), frame)
    gap = exact - effective
    return SpectrumComparison(
        delta=grid,
        exact=exact,
        effective=effective,
        ambiguous=ambiguous,
        max_real_deviation=float(np.max(np.abs(gap.real))),
        max_imag_deviation=float(np.max(np.abs(gap.imag))),
    )


def gamma_ladder(
    p: ThreeModeParams,
    gammas: Sequence[float],
    delta_grid: Sequence[float],
    frame: Optional[float] = None,
) -> np.ndarray:
    """Largest spectrum deviation for each mediator damping in ``gammas``."""
    return np.array(
        [
            compare_spectra(replace(p, gamma_aux=float(g)), delta_grid, frame).max_deviation
            for g in gammas
        ]
    )
