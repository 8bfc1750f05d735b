"""End-to-end tests of the command line entry point."""

import json
import subprocess
import sys
from pathlib import Path

import pandas as pd

ROOT = Path(__file__).parent.parent
CONFIGS = ROOT / "configs"

EP_CONFIG = """
[params]
n_modes = 3
omega0 = 1.0
omega = 1.0
gamma0 = 0.75
gamma = 0.25
coupling = 0.25
theta = 0.0

[time]
t_final = 1.0
n_samples = 11
"""


def _run(*args):
    return subprocess.run(
        [sys.executable, "-m", "nonhermitian_sync", *map(str, args)],
        capture_output=True,
        text=True,
        cwd=ROOT,
        timeout=300,
    )


def test_check_reports_synchronization(tmp_path):
    """check on the dissipative star network prints a success envelope."""
    result = _run("check", "--config", CONFIGS / "fig1cd.toml", "--out", tmp_path)
    assert result.returncode == 0, f"check failed: {result.stderr}"
    response = json.loads(result.stdout)
    assert response["success"] is True, "success flag"
    assert response["data"]["condition"]["verdict"] == "synchronizes", response["data"]["condition"]
    assert response["metadata"]["command"] == "check", "metadata records the command"
    assert (tmp_path / "check.csv").exists(), "check.csv written"
    sidecar = json.loads((tmp_path / "check.json").read_text())
    assert sidecar["data"] == response["data"], "sidecar matches stdout"


def test_evolve_is_reproducible(tmp_path):
    """evolve locks the network and reruns write identical CSV bytes."""
    first, second = tmp_path / "first", tmp_path / "second"
    for out in (first, second):
        result = _run("evolve", "--config", CONFIGS / "fig1cd.toml", "--out", out)
        assert result.returncode == 0, f"evolve failed: {result.stderr}"

    response = json.loads((first / "evolve.json").read_text())
    assert response["data"]["verdict"] == "synchronized", response["data"]
    assert response["data"]["z_final"] >= 0.99, "coherence at the end of the run"
    assert response["metadata"]["seeds"] == {"seed": 7}, "seed echoed"
    assert (first / "evolve.csv").read_bytes() == (second / "evolve.csv").read_bytes(), "CSV differs on rerun"

    frame = pd.read_csv(first / "evolve.csv")
    assert list(frame.columns) == ["t", "mode", "re", "im", "r", "phi", "z"], "evolve schema"
    assert len(frame) == 1001 * 101, "one row per time and mode"


def test_seed_flag_changes_initial_phases(tmp_path):
    """--seed overrides run.seed."""
    result = _run("evolve", "--config", CONFIGS / "fig1cd.toml", "--out", tmp_path, "--seed", 8)
    assert result.returncode == 0, result.stderr
    response = json.loads(result.stdout)
    assert response["metadata"]["seeds"] == {"seed": 8}, "seed override recorded"


def test_invalid_config_exits_with_input_error(tmp_path):
    """Configuration problems exit with code 1 and list every error."""
    config = tmp_path / "bad.toml"
    config.write_text(EP_CONFIG.replace("gamma = 0.25", "gamma = -0.25").replace("n_modes = 3", "n_modes = 0"))
    result = _run("check", "--config", config, "--out", tmp_path / "out")
    assert result.returncode == 1, f"expected exit 1, got {result.returncode}"
    response = json.loads(result.stdout)
    assert response["success"] is False, "failure envelope"
    assert response["details"]["kind"] == "input", "input failure"
    assert len(response["details"]["errors"]) >= 2, response["details"]


def test_exceptional_point_exits_with_numerical_error(tmp_path):
    """The collective transform is undefined at an exceptional point."""
    config = tmp_path / "ep.toml"
    config.write_text(EP_CONFIG)
    result = _run("kuramoto", "--config", config, "--out", tmp_path / "out")
    assert result.returncode == 2, f"expected exit 2, got {result.returncode}: {result.stderr}"
    assert json.loads(result.stdout)["details"]["kind"] == "numerical", "numerical failure"


def test_unwritable_output_exits_with_output_error(tmp_path):
    """An output directory that cannot be created exits with code 3."""
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    result = _run("check", "--config", CONFIGS / "fig1cd.toml", "--out", blocker / "sub")
    assert result.returncode == 3, f"expected exit 3, got {result.returncode}"
    assert json.loads(result.stdout)["details"]["kind"] == "output", "output failure"


def test_logs_stay_off_stdout(tmp_path):
    """With debug logging stdout still holds exactly one JSON document."""
    result = _run("check", "--config", CONFIGS / "fig1cd.toml", "--out", tmp_path, "--log-level", "DEBUG")
    assert result.returncode == 0, result.stderr
    json.loads(result.stdout)
    assert "INFO" in result.stderr or "DEBUG" in result.stderr, "logs should reach stderr"
