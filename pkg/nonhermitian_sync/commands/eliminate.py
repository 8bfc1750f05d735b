"""eliminate: three-mode versus effective two-mode spectra"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pandas as pd

from nonhermitian_sync.commands.common import CommandResult, add_common_arguments, require, save_table
from nonhermitian_sync.config import ExperimentConfig
from nonhermitian_sync.elimination import compare_spectra, effective_two_mode, gamma_ladder, regime_ratio
from nonhermitian_sync.utils.export import CSV_SCHEMAS

logger = logging.getLogger(__name__)


def register_command(subparsers) -> None:
    """Register the eliminate subcommand."""
    parser = subparsers.add_parser("eliminate", help="adiabatic elimination of the mediator mode")
    add_common_arguments(parser)
    parser.set_defaults(handler=run)


def run(config: ExperimentConfig, out_dir: Path, options: Any = None) -> CommandResult:
    section = require(config.elimination, "elimination")
    base = section.base
    grid = section.delta_grid
    comparison = compare_spectra(base, grid)
    effective = effective_two_mode(base)

    n = grid.size
    frame = pd.DataFrame(
        {
            "delta": np.repeat(grid, 2),
            "branch": np.tile([0, 1], n),
            "exact_re": comparison.exact.real.ravel(),
            "exact_im": comparison.exact.imag.ravel(),
            "effective_re": comparison.effective.real.ravel(),
            "effective_im": comparison.effective.imag.ravel(),
            "ambiguous": np.repeat(comparison.ambiguous.astype(int), 2),
        },
        columns=CSV_SCHEMAS["eliminate"],
    )
    artifact = save_table(frame, out_dir, "eliminate")

    data: Dict[str, Any] = {
        "regime_ratio": regime_ratio(base),
        "omega_eff": effective.omega_eff,
        "gamma_eff": effective.gamma_eff,
        "g12": effective.g12,
        "g21": effective.g21,
        "approx_deviation": effective.approx_deviation,
        "comparison_frame": base.omega2,
        "max_real_deviation": comparison.max_real_deviation,
        "max_imag_deviation": comparison.max_imag_deviation,
        "ambiguous_points": int(comparison.ambiguous.sum()),
    }
    if section.gamma_ladder is not None:
        data["gamma_ladder"] = {
            "gamma_aux": list(section.gamma_ladder),
            "max_deviation": gamma_ladder(base, section.gamma_ladder, grid),
        }
    return CommandResult("Effective two-mode model compared", data, [artifact])
