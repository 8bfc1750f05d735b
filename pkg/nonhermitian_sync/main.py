#!/usr/bin/env python3
"""
nonhermitian-sync command line entry point.
One subcommand per experiment; results go to CSV files plus a JSON sidecar.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from nonhermitian_sync import commands
from nonhermitian_sync.commands import check
from nonhermitian_sync.commands import disorder
from nonhermitian_sync.commands import eliminate
from nonhermitian_sync.commands import evolve
from nonhermitian_sync.commands import kuramoto
from nonhermitian_sync.commands import noise
from nonhermitian_sync.commands import sweep
from nonhermitian_sync.config import load_config
from nonhermitian_sync.errors import ConditionError, ConfigError, OutputError, ParameterError, SyncError
from nonhermitian_sync.utils.export import RunMetadata, write_json
from nonhermitian_sync.utils.helpers import create_error_response, create_success_response, sanitise_data

# Logs go to stderr; stdout carries only the JSON response
logging.basicConfig(
    level=logging.WARNING,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    handlers=[logging.StreamHandler(sys.stderr)],
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2
EXIT_OUTPUT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonhermitian-sync",
        description="Phase synchronization in non-Hermitian coupled-mode networks",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    check.register_command(subparsers)
    evolve.register_command(subparsers)
    kuramoto.register_command(subparsers)
    noise.register_command(subparsers)
    disorder.register_command(subparsers)
    eliminate.register_command(subparsers)
    sweep.register_command(subparsers)
    return parser


def tolerances() -> dict:
    """Numerical tolerances in effect, echoed into run metadata."""
    from nonhermitian_sync import disorder as disorder_lab
    from nonhermitian_sync import noise as noise_engine
    from nonhermitian_sync import params, phase, propagator
    from nonhermitian_sync import kuramoto as transform

    return {
        "condition_tol": params.CONDITION_TOL,
        "ep_threshold": params.EP_THRESHOLD,
        "series_cutoff": propagator.SERIES_CUTOFF,
        "degeneracy_tol": propagator.DEGENERACY_TOL,
        "steady_residual_tol": propagator.STEADY_RESIDUAL_TOL,
        "inverse_tol": transform.INVERSE_TOL,
        "sync_threshold": phase.SYNC_THRESHOLD,
        "amplitude_floor": phase.AMPLITUDE_FLOOR,
        "noise_floor_factor": noise_engine.NOISE_FLOOR_FACTOR,
        "histogram_bins": disorder_lab.HISTOGRAM_BINS,
        "trough_ratio": disorder_lab.TROUGH_RATIO,
        "dominance": disorder_lab.DOMINANCE,
    }


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command and return its exit code."""
    from nonhermitian_sync import __version__

    args = build_parser().parse_args(argv)
    logging.getLogger().setLevel(args.log_level)

    try:
        config = load_config(args.config, command=args.command, seed=args.seed, threads=args.threads)
        out_dir = Path(args.out if args.out is not None else config.output)
        started = time.perf_counter()
        result = args.handler(config, out_dir, args)
        metadata = RunMetadata(
            command=config.command,
            code_version=__version__,
            config=config.source,
            resolved=config.resolved,
            seeds={"seed": config.seed},
            rng_algorithm=result.rng_algorithm,
            tolerances=tolerances(),
            wall_clock=time.perf_counter() - started,
            artifacts=[Path(a).name for a in result.artifacts],
        )
        response = create_success_response(result.data, result.message)
        response["metadata"] = metadata.to_dict()
        write_json(response, out_dir / f"{config.command}.json")
        print(json.dumps(sanitise_data(response), sort_keys=True))
        return EXIT_OK
    except (ConfigError, ParameterError, ConditionError) as e:
        details = {"errors": e.errors} if isinstance(e, ConfigError) else {}
        return _fail(args.command, e, EXIT_INPUT, "input", details)
    except OutputError as e:
        return _fail(args.command, e, EXIT_OUTPUT, "output", {})
    except SyncError as e:
        return _fail(args.command, e, EXIT_NUMERICAL, "numerical", {"step": getattr(e, "step", None)})
    except OSError as e:
        return _fail(args.command, e, EXIT_OUTPUT, "output", {})


def _fail(command: str, error: Exception, code: int, kind: str, details: dict) -> int:
    logger.error(f"{command} failed ({kind}): {error}")
    details["kind"] = kind
    print(json.dumps(create_error_response(str(error), details), sort_keys=True))
    return code


def main(argv: Optional[List[str]] = None) -> None:
    """Main entry point for the nonhermitian-sync CLI."""
    try:
        code = run(argv)
    except Exception as e:
        logger.error(f"Unexpected failure: {e}")
        sys.exit(EXIT_NUMERICAL)
    sys.exit(code)


__all__ = ["main", "run", "build_parser", "commands"]

if __name__ == "__main__":
    main()
