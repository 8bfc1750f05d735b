"""Basis matrices shared by the propagator and the collective transform."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import block_diag


def fourier_block(n: int) -> np.ndarray:
    """Unitary ``N x N`` Fourier block; its last row is the uniform (bright) mode."""
    idx = np.arange(1, n + 1)
    # Reduce j*k mod n before exponentiating to keep the phases exact.
    phase = np.mod(np.outer(idx, idx), n) / n
    return np.exp(2j * math.pi * phase) / math.sqrt(n)


def fourier_transform(n: int) -> np.ndarray:
    """``T = 1 (+) F`` acting on the auxiliary mode plus ``n`` main modes."""
    return block_diag(np.ones((1, 1), dtype=complex), fourier_block(n))


def fourier_inverse(n: int) -> np.ndarray:
    return block_diag(np.ones((1, 1), dtype=complex), fourier_block(n).conj().T)


def shear_matrix(n: int, s: complex) -> np.ndarray:
    """Identity except ``S[0, N] = s`` and ``S[N, 0] = -s``."""
    shear = np.eye(n + 1, dtype=complex)
    shear[0, n] = s
    shear[n, 0] = -s
    return shear


def shear_inverse(n: int, s: complex) -> np.ndarray:
    """Closed-form inverse of :func:`shear_matrix`; singular when ``s**2 == -1``."""
    det = 1.0 + s * s
    inverse = np.eye(n + 1, dtype=complex)
    inverse[0, 0] = inverse[n, n] = 1.0 / det
    inverse[0, n] = -s / det
    inverse[n, 0] = s / det
    return inverse


def mixer_matrix(n: int) -> np.ndarray:
    """Difference-and-sum matrix spreading the bright component over the main modes.

    Rows ``1..N-1`` take ``x_N - x_j``; row ``N`` sums every main mode.
    """
    mixer = np.zeros((n + 1, n + 1), dtype=complex)
    mixer[0, 0] = 1.0
    rows = np.arange(1, n)
    mixer[rows, rows] = -1.0
    mixer[rows, n] = 1.0
    mixer[n, 1:] = 1.0
    return mixer
