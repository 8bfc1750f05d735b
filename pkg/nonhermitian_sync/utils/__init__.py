"""Shared utilities: response envelopes and artifact writers."""

from nonhermitian_sync.utils.helpers import (
    create_success_response,
    create_error_response,
    sanitise_data,
)
from nonhermitian_sync.utils.export import (
    CSV_SCHEMA_VERSION,
    RunMetadata,
    write_csv,
    write_json,
)

__all__ = [
    "create_success_response",
    "create_error_response",
    "sanitise_data",
    "CSV_SCHEMA_VERSION",
    "RunMetadata",
    "write_csv",
    "write_json",
]
