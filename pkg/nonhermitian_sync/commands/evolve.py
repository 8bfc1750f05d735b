"""evolve: bare-mode trajectories and phase-locking report"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Any

from nonhermitian_sync.commands.common import (
    CommandResult,
    add_common_arguments,
    require,
    save_table,
    trajectory_frame,
)
from nonhermitian_sync.config import ExperimentConfig
from nonhermitian_sync.phase import (
    BarePhaseModel,
    PhaseState,
    amplitude_ratio_spread,
    as_phase_trajectory,
    integrate,
    max_stable_step,
    sync_report,
)
from nonhermitian_sync.propagator import Trajectory, evolve_linear

logger = logging.getLogger(__name__)

RNG_NAME = "numpy Philox via SeedSequence([seed])"


def register_command(subparsers) -> None:
    """Register the evolve subcommand."""
    parser = subparsers.add_parser("evolve", help="propagate the star network in time")
    add_common_arguments(parser)
    parser.set_defaults(handler=run)


def run(config: ExperimentConfig, out_dir: Path, options: Any = None) -> CommandResult:
    params = require(config.params, "params")
    time_cfg = require(config.time, "time")
    a0 = config.initial.amplitudes(params, config.seed)
    times = time_cfg.times

    rk4_step = None
    if time_cfg.method == "polar":
        spacing = time_cfg.t_final / (time_cfg.n_samples - 1)
        substeps = max(1, math.ceil(spacing / (time_cfg.dt or spacing / 10)))
        model = BarePhaseModel(params)
        step = spacing / substeps
        rk4_step = step / max(1, math.ceil(step / max_stable_step(model, params.n_modes + 1)))
        phase_traj = integrate(
            model,
            PhaseState.from_complex(a0),
            spacing / substeps,
            substeps * (time_cfg.n_samples - 1),
            record_every=substeps,
        )
        traj = Trajectory(phase_traj.times, phase_traj.to_complex())
    else:
        traj = evolve_linear(params, a0, times)
        phase_traj = as_phase_trajectory(traj)

    report = sync_report(phase_traj, params)
    frame = trajectory_frame(traj, report.z_series)
    artifact = save_table(frame, out_dir, "evolve")
    data = {
        "method": time_cfg.method,
        "rk4_step": rk4_step,
        "tau_sync": report.tau_sync,
        "tau_dec": report.tau_dec,
        "verdict": report.verdict,
        "threshold": report.threshold,
        "z_initial": float(report.z_series[0]),
        "z_final": float(report.z_series[-1]),
        "amplitude_ratio_spread": amplitude_ratio_spread(phase_traj),
    }
    rng = RNG_NAME if config.initial.kind == "random_phase" else "none"
    return CommandResult(f"Evolution {report.verdict.value}", data, [artifact], rng)
