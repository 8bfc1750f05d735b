"""Pieces shared by every subcommand."""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from nonhermitian_sync.errors import ConfigError
from nonhermitian_sync.propagator import Trajectory
from nonhermitian_sync.utils.export import CSV_SCHEMAS, write_csv


@dataclass
class CommandResult:
    message: str
    data: Dict[str, Any]
    artifacts: List[str] = field(default_factory=list)
    rng_algorithm: str = "none"


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="TOML experiment configuration")
    parser.add_argument("--out", default=None, help="output directory (overrides run.output)")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (overrides run.seed)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads, 0 = all cores")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="stderr log level",
    )


def require(value: Any, section: str) -> Any:
    """Return ``value`` or fail the way a missing config section does."""
    if value is None:
        raise ConfigError([f"[{section}]: section is incomplete"])
    return value


def trajectory_frame(traj: Trajectory, z: np.ndarray) -> pd.DataFrame:
    """Long-format table with one row per (time, mode)."""
    n_t, dim = traj.states.shape
    phases = traj.phases()
    return pd.DataFrame(
        {
            "t": np.repeat(traj.times, dim),
            "mode": np.tile(np.arange(dim), n_t),
            "re": traj.states.real.ravel(),
            "im": traj.states.imag.ravel(),
            "r": np.abs(traj.states).ravel(),
            "phi": phases.ravel(),
            "z": np.repeat(z, dim),
        },
        columns=CSV_SCHEMAS["evolve"],
    )


def save_table(frame: pd.DataFrame, out_dir: Path, name: str) -> str:
    path = write_csv(frame, out_dir / f"{name}.csv")
    return str(path)
