"""Tests for system parameters, the evolution matrix and the sync conditions."""

import math

import numpy as np
import pytest

from nonhermitian_sync.errors import ConditionError, ParameterError
from nonhermitian_sync.params import (
    Branch,
    SyncMode,
    SystemParams,
    Verdict,
    build_evolution_matrix,
    derived_params,
    exceptional_point_locus,
    solve_drive_frequency,
    solve_sync_angle,
    sync_condition_driven,
    sync_condition_undriven,
    wrap_angle,
)
from nonhermitian_sync.propagator import long_time_ratio, spectrum, steady_state


def _random_params(rng, driven=False):
    n = int(rng.integers(1, 7))
    params = SystemParams(
        n_modes=n,
        omega0=float(rng.uniform(0.5, 1.5)),
        gamma0=float(rng.uniform(0.05, 1.0)),
        omega=float(rng.uniform(0.5, 1.5)),
        gamma=float(rng.uniform(0.05, 1.0)),
        coupling=float(rng.uniform(0.1, 1.0)),
        theta=float(rng.uniform(-math.pi, math.pi)),
        drive=float(rng.uniform(0.5, 2.0)) if driven else 0.0,
        drive_freq=float(rng.uniform(0.5, 1.5)) if driven else 0.0,
    )
    return params


def _strictly_damped(params):
    return spectrum(params).max_decay_imag < -0.01


def _closest_distance(values, reference):
    return max(float(np.min(np.abs(reference - v))) for v in values)


def test_invalid_params_aggregate_errors():
    """Every violated invariant is reported in one ParameterError."""
    with pytest.raises(ParameterError) as info:
        SystemParams(n_modes=2, omega0=1.0, gamma0=-0.1, omega=1.0, gamma=-1.0, coupling=0.5, theta=4.0)
    message = str(info.value)
    assert "gamma0" in message and "gamma must" in message, "both damping errors should be listed"
    assert "theta" in message, "theta range error should be listed"


def test_rejects_zero_modes_and_nan():
    """n_modes < 1 and non-finite values are rejected."""
    with pytest.raises(ParameterError):
        SystemParams(n_modes=0, omega0=1.0, gamma0=0.1, omega=1.0, gamma=0.1, coupling=0.5)
    with pytest.raises(ParameterError):
        SystemParams(n_modes=2, omega0=math.nan, gamma0=0.1, omega=1.0, gamma=0.1, coupling=0.5)


def test_wrap_angle_range():
    """Angles land in (-pi, pi] and scalars stay scalars."""
    assert wrap_angle(-math.pi) == pytest.approx(math.pi), "-pi should wrap to pi"
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi), "3 pi should wrap to pi"
    assert isinstance(wrap_angle(0.5), float), "scalar input should give a float"
    wrapped = wrap_angle(np.linspace(-10, 10, 101))
    assert np.all(wrapped > -math.pi) and np.all(wrapped <= math.pi), "array wrap out of range"


def test_evolution_matrix_layout():
    """H has the star structure with links c / sqrt(N)."""
    params = SystemParams(
        n_modes=4, omega0=2.0, gamma0=0.3, omega=1.5, gamma=0.2, coupling=0.8, theta=0.25 * math.pi,
        drive=1.0, drive_freq=1.0,
    )
    h = build_evolution_matrix(params)
    link = 0.8 * np.exp(0.25j * math.pi) / 2.0

    assert h.shape == (5, 5), "matrix should be (N+1) x (N+1)"
    assert h[0, 0] == pytest.approx(1.0 - 0.3j), "auxiliary level is detuned from the drive"
    assert np.allclose(np.diag(h)[1:], 0.5 - 0.2j), "main levels are detuned from the drive"
    assert np.allclose(h[0, 1:], link) and np.allclose(h[1:, 0], link), "links should be c / sqrt(N)"
    assert np.allclose(h[1:, 1:] - np.diag(np.diag(h)[1:]), 0), "main modes do not couple directly"
    assert np.allclose(h, h.T), "H is complex symmetric"


def test_main_freqs_override():
    """Disorder frequencies replace the main diagonal."""
    params = SystemParams(n_modes=3, omega0=1.0, gamma0=0.1, omega=1.0, gamma=0.2, coupling=0.5)
    h = build_evolution_matrix(params, main_freqs=np.array([0.9, 1.0, 1.1]))
    assert np.allclose(np.diag(h)[1:].real, [0.9, 1.0, 1.1]), "disorder frequencies not applied"
    with pytest.raises(ParameterError):
        build_evolution_matrix(params, main_freqs=np.ones(2))


def test_shear_product_and_spectrum():
    """s+ s- = -1 and the closed-form spectrum matches a dense eigensolver."""
    rng = np.random.default_rng(1)
    checked = 0
    for _ in range(300):
        params = _random_params(rng, driven=bool(rng.integers(0, 2)))
        derived = derived_params(params)
        if abs(derived.mu) < 0.05:
            continue
        assert abs(derived.s_plus * derived.s_minus + 1) < 1e-12, "shear product should be -1"
        closed = spectrum(params).eigenvalues()
        dense = np.linalg.eigvals(build_evolution_matrix(params))
        assert _closest_distance(dense, closed) < 1e-9, "dense eigenvalue missing from closed form"
        assert _closest_distance(closed, dense) < 1e-9, "closed-form eigenvalue missing from dense set"
        checked += 1
    assert checked > 200, "too few draws away from the exceptional point"


def test_exceptional_point_flag_exact():
    """Theta = 0 with dg = 2g hits the exceptional point exactly."""
    params = SystemParams(n_modes=3, omega0=1.0, gamma0=0.75, omega=1.0, gamma=0.25, coupling=0.25)
    derived = derived_params(params)
    assert derived.ep_flag, "mu should vanish on the locus"
    assert spectrum(params).ep_flag, "spectrum should carry the flag"


def test_exceptional_point_locus_zeroes_mu():
    """Points returned by exceptional_point_locus make mu vanish."""
    rng = np.random.default_rng(2)
    for _ in range(50):
        g = float(rng.uniform(0.1, 1.0))
        theta = float(rng.uniform(-math.pi, math.pi))
        for dw, dg in exceptional_point_locus(g, theta):
            gamma = 3.0
            params = SystemParams(
                n_modes=2, omega0=1.0 + dw, gamma0=gamma + dg, omega=1.0, gamma=gamma, coupling=g, theta=theta
            )
            assert abs(derived_params(params).mu) < 1e-6, "mu should vanish on the locus"


def test_auto_branch_requires_resolution():
    """The auto branch has no shear of its own."""
    params = SystemParams(n_modes=2, omega0=1.0, gamma0=0.1, omega=1.0, gamma=0.2, coupling=0.5, theta=1.0)
    with pytest.raises(ParameterError):
        derived_params(params).shear(Branch.AUTO)


def test_undriven_anti_hermitian_synchronizes():
    """Theta = pi/2, dw = 0 and dg < 0 satisfies the undriven condition."""
    params = SystemParams(
        n_modes=100, omega0=1.0, gamma0=0.05, omega=1.0, gamma=0.1, coupling=1.0, theta=math.pi / 2
    )
    report = sync_condition_undriven(params)
    assert abs(report.residual_imag) < 1e-12, "residual should vanish"
    assert report.verdict is Verdict.SYNCHRONIZES, f"unexpected verdict {report.verdict}"
    assert report.branch_note == "", "no caveat expected"


def test_undriven_residual_failure():
    """A non-zero residual fails the condition."""
    params = SystemParams(
        n_modes=3, omega0=1.2, gamma0=0.05, omega=1.0, gamma=0.1, coupling=1.0, theta=math.pi / 2
    )
    report = sync_condition_undriven(params)
    assert report.verdict is Verdict.FAILS, "residual 0.2 should fail"
    assert report.residual_imag == pytest.approx(0.2), "residual should be dw"


def test_branch_note_when_auxiliary_decays_faster():
    """dg > 0 flips the closed-form verdict relative to the surviving eigenmode."""
    params = SystemParams(
        n_modes=3, omega0=1.0, gamma0=0.3, omega=1.0, gamma=0.2, coupling=0.5, theta=math.pi / 2
    )
    report = sync_condition_undriven(params)
    assert report.verdict is Verdict.ANTI_SYNCHRONIZES, "closed-form verdict follows the inequality"
    assert "in phase" in report.branch_note, "note should name the true locking sign"


def test_branch_note_hermitian_coupling():
    """Theta = 0 is flagged as degenerate."""
    params = SystemParams(n_modes=2, omega0=1.5, gamma0=0.2, omega=1.0, gamma=0.2, coupling=0.5, theta=0.0)
    report = sync_condition_undriven(params)
    assert report.verdict is Verdict.SYNCHRONIZES, "dw > 0 with theta = 0 satisfies the inequality"
    assert "Hermitian coupling" in report.branch_note, "degenerate case should be flagged"


def test_condition_regime_errors():
    """Asking for the wrong regime is a ConditionError."""
    undriven = SystemParams(n_modes=2, omega0=1.0, gamma0=0.1, omega=1.0, gamma=0.2, coupling=0.5)
    driven = undriven.replace(drive=1.0, drive_freq=1.0)
    with pytest.raises(ConditionError):
        sync_condition_driven(undriven)
    with pytest.raises(ConditionError):
        sync_condition_undriven(driven)


def test_solve_sync_angle_vacuous():
    """dw = dg = 0 leaves nothing to solve."""
    params = SystemParams(n_modes=2, omega0=1.0, gamma0=0.2, omega=1.0, gamma=0.2, coupling=0.5)
    with pytest.raises(ConditionError, match="vacuous"):
        solve_sync_angle(params, SyncMode.UNDRIVEN)


def test_solved_angles_satisfy_conditions():
    """solve_sync_angle lands on the synchronizing branch in both regimes."""
    rng = np.random.default_rng(3)
    for _ in range(200):
        undriven = _random_params(rng)
        theta = solve_sync_angle(undriven, SyncMode.UNDRIVEN)
        assert -math.pi < theta <= math.pi, "angle out of range"
        report = sync_condition_undriven(undriven.replace(theta=theta))
        assert report.verdict is Verdict.SYNCHRONIZES, f"undriven verdict {report.verdict}"

        driven = _random_params(rng, driven=True)
        theta = solve_sync_angle(driven, SyncMode.DRIVEN)
        report = sync_condition_driven(driven.replace(theta=theta))
        assert report.verdict is Verdict.SYNCHRONIZES, f"driven verdict {report.verdict}"


def test_solve_drive_frequency():
    """The solved drive frequency satisfies the driven condition."""
    params = SystemParams(
        n_modes=5, omega0=1.0, gamma0=0.3, omega=1.0, gamma=0.4, coupling=0.5, theta=0.3 * math.pi,
        drive=1.0, drive_freq=0.0,
    )
    omega_d = solve_drive_frequency(params)
    assert omega_d == pytest.approx(1.0 + 0.4 / math.tan(0.3 * math.pi)), "closed form mismatch"
    report = sync_condition_driven(params.replace(drive_freq=omega_d))
    assert report.verdict is Verdict.SYNCHRONIZES, "solved frequency should synchronize"

    with pytest.raises(ConditionError):
        solve_drive_frequency(params.replace(theta=-0.3 * math.pi))


def test_driven_steady_state_phases_agree():
    """On the driven sync branch every mode shares the auxiliary phase."""
    rng = np.random.default_rng(4)
    checked = 0
    while checked < 200:
        params = _random_params(rng, driven=True)
        params = params.replace(theta=solve_sync_angle(params, SyncMode.DRIVEN))
        if not _strictly_damped(params):
            continue
        checked += 1
        amplitudes = steady_state(params)
        spread = np.max(np.abs(wrap_angle(np.angle(amplitudes) - np.angle(amplitudes[0]))))
        assert spread < 1e-6, f"steady phases spread by {spread}"


def test_driven_violation_spreads_phases():
    """A residual of at least 0.1 leaves a visible steady phase spread."""
    rng = np.random.default_rng(5)
    checked = 0
    while checked < 200:
        params = _random_params(rng, driven=True)
        if abs(sync_condition_driven(params).residual_imag) < 0.1 or not _strictly_damped(params):
            continue
        amplitudes = steady_state(params)
        spread = np.max(np.abs(wrap_angle(np.angle(amplitudes) - np.angle(amplitudes[0]))))
        assert spread > 1e-2, f"spread {spread} too small for a violated condition"
        checked += 1


def test_undriven_long_time_ratio_is_in_phase():
    """With dg < 0 the solved angle locks the surviving eigenmode in phase."""
    rng = np.random.default_rng(6)
    checked = 0
    while checked < 200:
        params = _random_params(rng)
        if params.gamma0 >= params.gamma - 0.05:
            continue
        params = params.replace(theta=solve_sync_angle(params, SyncMode.UNDRIVEN))
        ratio = long_time_ratio(params)
        assert abs(np.angle(ratio)) < 1e-6, f"long-time ratio {ratio} is not real positive"
        checked += 1
