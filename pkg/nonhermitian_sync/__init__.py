"""nonhermitian-sync - phase synchronization in non-Hermitian coupled-mode networks"""

__version__ = "1.0.0"

# Import main entry point for programmatic access
from nonhermitian_sync.main import main
from nonhermitian_sync.errors import SyncError
from nonhermitian_sync.params import (
    Branch,
    SyncMode,
    SystemParams,
    Verdict,
    build_evolution_matrix,
    derived_params,
    solve_drive_frequency,
    solve_sync_angle,
    sync_condition_driven,
    sync_condition_undriven,
)
from nonhermitian_sync.propagator import evolve_linear, long_time_ratio, steady_state
from nonhermitian_sync.kuramoto import build_transform, effective_parameters

__all__ = [
    "main",
    "__version__",
    "SyncError",
    "Branch",
    "SyncMode",
    "SystemParams",
    "Verdict",
    "build_evolution_matrix",
    "derived_params",
    "solve_drive_frequency",
    "solve_sync_angle",
    "sync_condition_driven",
    "sync_condition_undriven",
    "evolve_linear",
    "long_time_ratio",
    "steady_state",
    "build_transform",
    "effective_parameters",
]
