"""Shared utility functions for nonhermitian_sync"""

import math
import time
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np


def create_success_response(
    data: Any = None, message: str = "Success"
) -> Dict[str, Any]:
    """Create a standardized success response."""
    return {
        "success": True,
        "message": message,
        "data": sanitise_data(data),
        "timestamp": time.time(),
    }


def create_error_response(error: str, details: Optional[Dict] = None) -> Dict[str, Any]:
    """Create a standardized error response."""
    return {
        "success": False,
        "error": error,
        "details": sanitise_data(details or {}),
        "timestamp": time.time(),
    }


def sanitise_data(data: Any) -> Any:
    """Convert numpy scalars/arrays, complex numbers and enums into JSON-safe values."""
    if isinstance(data, dict):
        return {str(k): sanitise_data(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [sanitise_data(item) for item in data]
    if isinstance(data, np.ndarray):
        return [sanitise_data(item) for item in data.tolist()]
    if isinstance(data, Enum):
        return data.value
    if isinstance(data, (bool, np.bool_)):
        return bool(data)
    if isinstance(data, (int, np.integer)):
        return int(data)
    if isinstance(data, (float, np.floating)):
        value = float(data)
        # JSON has no NaN/inf literals
        return value if math.isfinite(value) else None
    if isinstance(data, (complex, np.complexfloating)):
        return {"re": sanitise_data(data.real), "im": sanitise_data(data.imag)}
    if isinstance(data, str) or data is None:
        return data
    return str(data)
