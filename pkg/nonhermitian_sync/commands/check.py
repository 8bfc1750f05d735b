"""check: closed-form diagnostics for one parameter set"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict

import pandas as pd

from nonhermitian_sync.commands.common import CommandResult, add_common_arguments, require, save_table
from nonhermitian_sync.config import ExperimentConfig
from nonhermitian_sync.errors import SyncError, UndampedSystemError
from nonhermitian_sync.params import (
    derived_params,
    exceptional_point_locus,
    sync_condition_driven,
    sync_condition_undriven,
)
from nonhermitian_sync.propagator import classify_levels, long_time_ratio, spectrum, steady_state
from nonhermitian_sync.utils.export import CSV_SCHEMAS

logger = logging.getLogger(__name__)


def register_command(subparsers) -> None:
    """Register the check subcommand."""
    parser = subparsers.add_parser("check", help="evaluate sync conditions and the spectrum")
    add_common_arguments(parser)
    parser.set_defaults(handler=run)


def run(config: ExperimentConfig, out_dir: Path, options: Any = None) -> CommandResult:
    params = require(config.params, "params")
    derived = derived_params(params)
    spec = spectrum(params)
    if params.is_driven:
        report = sync_condition_driven(params)
    else:
        report = sync_condition_undriven(params)

    data: Dict[str, Any] = {
        "mode": "driven" if params.is_driven else "undriven",
        "condition": {
            "verdict": report.verdict,
            "residual_imag": report.residual_imag,
            "inequality_ok": report.inequality_ok,
            "branch_note": report.branch_note,
        },
        "exceptional_point": derived.ep_flag,
        "exceptional_point_locus": exceptional_point_locus(params.coupling, params.theta),
        "level_pattern": classify_levels(spec),
        "mu": derived.mu,
        "s_plus": derived.s_plus,
        "s_minus": derived.s_minus,
        "max_decay_imag": spec.max_decay_imag,
    }
    rows = [
        ("mu", derived.mu),
        ("s_plus", derived.s_plus),
        ("s_minus", derived.s_minus),
        ("lambda_plus", spec.lambda_plus),
        ("lambda_minus", spec.lambda_minus),
        ("lambda_dark", spec.lambda_dark),
    ]

    try:
        ratio = long_time_ratio(params)
        data["long_time_ratio"] = ratio
        rows.append(("long_time_ratio", ratio))
    except SyncError as e:
        logger.info(f"no long-time ratio: {e}")
        data["long_time_ratio"] = None
        data["long_time_note"] = str(e)

    if params.is_driven:
        try:
            amplitudes = steady_state(params)
            rows.append(("steady_aux", amplitudes[0]))
            rows.append(("steady_main", amplitudes[1]))
        except UndampedSystemError as e:
            data["steady_state_note"] = str(e)

    frame = pd.DataFrame(
        [(name, complex(value).real, complex(value).imag) for name, value in rows],
        columns=CSV_SCHEMAS["check"],
    )
    artifact = save_table(frame, out_dir, "check")
    return CommandResult(f"Condition {report.verdict.value}", data, [artifact])
