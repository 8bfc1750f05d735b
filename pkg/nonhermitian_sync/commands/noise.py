"""noise: thermal ensembles and phase-difference statistics"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pandas as pd
from scipy.stats import linregress

from nonhermitian_sync.commands.common import CommandResult, add_common_arguments, require, save_table
from nonhermitian_sync.config import ExperimentConfig
from nonhermitian_sync.noise import Ensemble, PhaseStats, noise_time, phase_stats, sde_evolve
from nonhermitian_sync.utils.export import CSV_SCHEMAS

logger = logging.getLogger(__name__)


def register_command(subparsers) -> None:
    """Register the noise subcommand."""
    parser = subparsers.add_parser("noise", help="simulate a thermal-noise ensemble")
    add_common_arguments(parser)
    parser.set_defaults(handler=run)


def late_window_fit(stats: PhaseStats) -> Dict[str, Any]:
    """Linear fit of the phase-difference variance over the second half of the run."""
    half = stats.times.size // 2
    t = stats.times[half:]
    var = stats.var_dphi[half:]
    usable = np.isfinite(var)
    summary: Dict[str, Any] = {
        "late_var_max": float(np.nanmax(var)) if usable.any() else None,
        "late_var_median": float(np.nanmedian(var)) if usable.any() else None,
        "late_mean_dphi": float(np.nanmean(stats.mean_dphi[half:])) if usable.any() else None,
    }
    if usable.sum() >= 3:
        fit = linregress(t[usable], var[usable])
        summary.update(late_var_slope=float(fit.slope), late_var_r_squared=float(fit.rvalue**2))
    return summary


def _stats_frame(ens: Ensemble, ref_mode: int, exclude: bool) -> pd.DataFrame:
    frames = []
    for mode in range(ens.paths.shape[2]):
        if mode == ref_mode:
            continue
        stats = phase_stats(ens, ref_mode, modes=[mode], exclude_noise_dominated=exclude)
        frames.append(
            pd.DataFrame(
                {
                    "t": stats.times,
                    "mode": mode,
                    "mean_dphi": stats.mean_dphi,
                    "var_dphi": stats.var_dphi,
                    "valid": stats.valid.astype(int),
                    "excluded_fraction": stats.excluded_fraction,
                },
                columns=CSV_SCHEMAS["noise"],
            )
        )
    return pd.concat(frames, ignore_index=True)


def run(config: ExperimentConfig, out_dir: Path, options: Any = None) -> CommandResult:
    params = require(config.params, "params")
    time_cfg = require(config.time, "time")
    section = require(config.noise, "noise")
    a0 = config.initial.amplitudes(params, config.seed)

    ens = sde_evolve(params, section.config, a0, time_cfg.t_final, threads=config.threads)
    stats = phase_stats(ens, section.ref_mode, exclude_noise_dominated=section.exclude_noise_dominated)
    invalid = int((~stats.valid).sum())
    if invalid:
        logger.info(f"{invalid} time slices have no usable samples")
    artifact = save_table(_stats_frame(ens, section.ref_mode, section.exclude_noise_dominated), out_dir, "noise")

    data: Dict[str, Any] = {
        "n_paths": ens.n_paths,
        "noise_weights": ens.weights,
        "tau_noise": noise_time(ens, section.ref_mode),
        "exclude_noise_dominated": section.exclude_noise_dominated,
        "invalid_slices": invalid,
    }
    data.update(late_window_fit(stats))
    return CommandResult(f"Simulated {ens.n_paths} noisy paths", data, [artifact], ens.rng_algorithm)
