"""CSV and JSON artifact writers.

Every file is written to a temporary sibling and moved into place with
``os.replace``, so a rerun always leaves a complete file behind.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Union

import pandas as pd

from nonhermitian_sync.errors import OutputError
from nonhermitian_sync.utils.helpers import sanitise_data

logger = logging.getLogger(__name__)

CSV_SCHEMA_VERSION = "2"
FLOAT_FORMAT = "%.17g"

CSV_SCHEMAS: Dict[str, List[str]] = {
    "check": ["quantity", "re", "im"],
    "evolve": ["t", "mode", "re", "im", "r", "phi", "z"],
    "kuramoto": ["t", "mode", "re", "im", "r", "phi", "z"],
    "noise": ["t", "mode", "mean_dphi", "var_dphi", "valid", "excluded_fraction"],
    "disorder": ["sigma", "sigma_phi", "z_mean", "z_se", "bimodal", "peak_1", "peak_2"],
    "disorder_histogram": ["sigma", "bin_left", "bin_right", "count", "smoothed"],
    "eliminate": ["delta", "branch", "exact_re", "exact_im", "effective_re", "effective_im", "ambiguous"],
    "sweep": ["value", "tau_sync", "tau_sem", "inverse_tau"],
}


@dataclass
class RunMetadata:
    """Everything needed to reproduce a run."""

    command: str
    code_version: str
    config: Dict[str, Any]
    resolved: Dict[str, Any]
    seeds: Dict[str, int]
    rng_algorithm: str
    tolerances: Dict[str, float]
    csv_schema_version: str = CSV_SCHEMA_VERSION
    wall_clock: float = 0.0
    artifacts: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return sanitise_data(asdict(self))


def _atomic_write(path: Union[str, Path], writer: Callable[[Any], None]) -> Path:
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                writer(handle)
            os.replace(tmp_name, target)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
    except OSError as e:
        raise OutputError(f"failed to write {target}: {e}") from e
    logger.info(f"wrote {target}")
    return target


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    return _atomic_write(path, lambda handle: frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT))


def write_json(payload: Dict[str, Any], path: Union[str, Path]) -> Path:
    text = json.dumps(sanitise_data(payload), indent=2, sort_keys=True)
    return _atomic_write(path, lambda handle: handle.write(text + "\n"))
