"""Tests for TOML configuration parsing."""

import math
import textwrap

import pytest

from nonhermitian_sync.config import COMMANDS, load_config, parse_config
from nonhermitian_sync.errors import ConfigError

PARAMS = """
[params]
n_modes = 4
omega0 = 1.0
omega = 1.0
gamma0 = 0.05
gamma = 0.1
coupling = 0.5
theta_over_pi = 0.5
"""


def _errors(text: str, command: str = "check") -> list:
    with pytest.raises(ConfigError) as excinfo:
        parse_config(textwrap.dedent(text), command=command)
    return excinfo.value.errors


def test_minimal_check_config():
    """A params table alone is enough for check; defaults fill the rest."""
    config = parse_config(PARAMS, command="check")
    assert config.command == "check", "command comes from the CLI"
    assert config.seed == 0 and config.threads == 1 and config.output == "results", "run defaults"
    assert config.params.n_modes == 4, "n_modes"
    assert config.params.theta == pytest.approx(math.pi / 2), "theta_over_pi is scaled by pi"
    assert not config.params.is_driven, "drive defaults to zero"
    assert config.resolved == {}, "nothing was auto-resolved"


def test_cli_overrides_run_section():
    """Seed and threads from the command line beat [run]."""
    text = "[run]\nseed = 3\nthreads = 2\n" + PARAMS
    config = parse_config(text, command="check", seed=9, threads=0)
    assert (config.seed, config.threads) == (9, 0), "CLI values should win"
    assert parse_config(text, command="check").seed == 3, "run.seed applies without an override"


def test_auto_theta_lands_on_the_sync_locus():
    """theta = "auto" solves the undriven condition and is recorded as resolved."""
    text = PARAMS.replace("theta_over_pi = 0.5", 'theta = "auto"').replace("omega0 = 1.0", "omega0 = 1.1")
    config = parse_config(text, command="check")
    theta = config.resolved["theta"]
    assert config.params.theta == theta, "resolved theta is used"
    residual = 0.1 * math.sin(theta) + (0.05 - 0.1) * math.cos(theta)
    assert abs(residual) < 1e-12, f"residual {residual}"


def test_auto_drive_frequency():
    """drive_freq = "auto" solves the driven condition at the given theta."""
    text = PARAMS.replace("theta_over_pi = 0.5", 'theta_over_pi = 0.25\ndrive = 1.0\ndrive_freq = "auto"')
    config = parse_config(text, command="check")
    assert config.resolved["drive_freq"] == pytest.approx(1.0 + 0.1), "Omega = omega + gamma cot(theta)"


def test_auto_drive_frequency_needs_a_drive():
    """drive_freq = "auto" on an undriven system is an error."""
    errors = _errors(PARAMS + 'drive_freq = "auto"\n')
    assert any("drive_freq" in e for e in errors), errors


def test_problems_are_aggregated():
    """Every invalid value is reported in a single error."""
    errors = _errors(
        """
        [params]
        n_modes = 0
        omega0 = 1.0
        omega = "fast"
        gamma0 = -0.1
        gamma = 0.1
        coupling = 0.5
        """
    )
    assert any("n_modes" in e for e in errors), errors
    assert any("params.omega:" in e for e in errors), errors
    assert any("gamma0" in e for e in errors), errors
    assert len(errors) >= 3, errors


def test_unknown_sections_and_keys_are_errors():
    """Typos are not silently ignored."""
    errors = _errors(PARAMS + "colour = 3\n[plotting]\nstyle = 1\n")
    assert any("params.colour: unknown key" in e for e in errors), errors
    assert any("[plotting]: unknown section" in e for e in errors), errors


def test_missing_sections_and_keys():
    """Commands name the sections they need; required keys must be present."""
    errors = _errors(PARAMS, command="evolve")
    assert any("[time]" in e for e in errors), errors
    errors = _errors("[params]\nn_modes = 2\n")
    assert any("omega0: missing required key" in e for e in errors), errors


def test_command_conflict_and_absence():
    """run.command must agree with the CLI and some command must be given."""
    errors = _errors('[run]\ncommand = "noise"\n' + PARAMS, command="check")
    assert any("run.command" in e for e in errors), errors
    with pytest.raises(ConfigError):
        parse_config(PARAMS)


def test_theta_given_twice():
    """theta and theta_over_pi are mutually exclusive."""
    errors = _errors(PARAMS + "theta = 1.0\n")
    assert any("theta_over_pi" in e for e in errors), errors


def test_invalid_toml():
    """Syntax errors surface as configuration errors."""
    errors = _errors("[params\n")
    assert errors[0].startswith("invalid TOML"), errors


def test_sections_are_validated_per_command():
    """Noise, disorder, sweep and elimination tables build their typed configs."""
    text = (
        PARAMS
        + "[time]\nt_final = 5.0\n"
        + "[noise]\ntemperature = 0.01\nn_paths = 10\nref_mode = 2\n"
        + "[disorder]\nsigma_grid = [0.01, 0.02, 0.03]\n"
        + '[sweep]\naxis = "coupling"\nvalues = [0.1, 0.2, 0.3]\n'
    )
    config = parse_config(text, command="noise", seed=4)
    assert config.noise.config.seed == 4, "noise seed follows the run seed"
    assert config.noise.ref_mode == 2, "ref_mode"
    assert config.disorder.config.mean_freq == 1.0, "mean_freq defaults to params.omega"
    assert config.sweep.values == (0.1, 0.2, 0.3), "values"
    assert config.sweep.n_initial == 32, "32 random-phase starts by default"
    assert config.time.times[-1] == 5.0 and config.time.times.size == 201, "default grid"

    errors = _errors(text.replace("ref_mode = 2", "ref_mode = 9"), command="noise")
    assert any("ref_mode" in e for e in errors), errors
    errors = _errors(text.replace("[0.01, 0.02, 0.03]", "[0.02, 0.01, 0.03]"), command="noise")
    assert any("sigma_grid" in e for e in errors), errors
    errors = _errors(text + "n_initial = 0\n", command="noise")
    assert any("n_initial" in e for e in errors), errors


def test_elimination_section():
    """Complex couplings may be given as [re, im]."""
    config = parse_config(
        textwrap.dedent(
            """
            [elimination]
            omega2 = 1.0
            omega_aux = 1.0
            gamma1 = 0.01
            gamma2 = 0.012
            gamma_aux = 10.0
            g1 = [0.5, 0.1]
            g2 = 0.5
            n_delta = 11
            """
        ),
        command="eliminate",
    )
    assert config.elimination.base.g1 == complex(0.5, 0.1), "g1 from [re, im]"
    assert config.elimination.delta_grid.size == 11, "delta grid"


def test_steady_state_initial_needs_drive():
    """The stationary initial state only exists for driven systems."""
    errors = _errors(PARAMS + '[initial]\nkind = "steady_state"\n')
    assert any("steady_state" in e for e in errors), errors


def test_load_config_missing_file(tmp_path):
    """Unreadable paths are configuration errors."""
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.toml", command="check")
    assert "check" in COMMANDS, "check is a known command"
