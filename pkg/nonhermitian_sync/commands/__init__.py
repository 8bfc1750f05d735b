"""nonhermitian_sync subcommands"""

# Import all command modules for easy access
from nonhermitian_sync.commands import (
    check,
    disorder,
    eliminate,
    evolve,
    kuramoto,
    noise,
    sweep,
)

__all__ = ["check", "disorder", "eliminate", "evolve", "kuramoto", "noise", "sweep"]
