"""kuramoto: collective-basis view of a trajectory"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import numpy as np

from nonhermitian_sync.commands.common import (
    CommandResult,
    add_common_arguments,
    require,
    save_table,
    trajectory_frame,
)
from nonhermitian_sync.config import ExperimentConfig
from nonhermitian_sync.errors import UndampedSystemError
from nonhermitian_sync.kuramoto import (
    assemble_collective_matrix,
    build_transform,
    closed_form_collective_matrix,
    collective_steady_states,
    collective_trajectory,
    effective_summary,
)
from nonhermitian_sync.propagator import evolve_linear

logger = logging.getLogger(__name__)


def register_command(subparsers) -> None:
    """Register the kuramoto subcommand."""
    parser = subparsers.add_parser("kuramoto", help="map the star network onto collective modes")
    add_common_arguments(parser)
    parser.add_argument(
        "--branch", default="auto", choices=["auto", "plus", "minus"], help="isolated eigenvalue branch"
    )
    parser.set_defaults(handler=run)


def run(config: ExperimentConfig, out_dir: Path, options: Any = None) -> CommandResult:
    branch = getattr(options, "branch", "auto")
    params = require(config.params, "params")
    time_cfg = require(config.time, "time")
    transform = build_transform(params, branch)
    numeric = assemble_collective_matrix(params, transform)
    closed = closed_form_collective_matrix(params, transform)

    a0 = config.initial.amplitudes(params, config.seed)
    traj = collective_trajectory(evolve_linear(params, a0, time_cfg.times), transform)
    z = np.abs(np.mean(np.exp(1j * np.angle(traj.states[:, 1:])), axis=1))
    artifact = save_table(trajectory_frame(traj, z), out_dir, "kuramoto")

    data = {
        "effective": effective_summary(params, transform.branch),
        "shear": transform.shear,
        "matrix_mismatch": float(np.max(np.abs(numeric - closed))),
        "z_final": float(z[-1]),
    }
    try:
        pi0, pi_sync = collective_steady_states(params, transform)
        data["steady_isolated"] = pi0
        data["steady_collective"] = pi_sync
    except UndampedSystemError as e:
        data["steady_state_note"] = str(e)
    return CommandResult(f"Collective model on the {transform.branch.value} branch", data, [artifact])
