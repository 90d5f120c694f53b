"""Simulator and security analyzer for a singlet-keyed one-bit quantum
message-authentication protocol."""

__version__ = "0.1.0"

from .config import DEFAULT_TOL, Tolerances
from .protocol import TaggingUnitary

__all__ = ["DEFAULT_TOL", "Tolerances", "TaggingUnitary", "__version__"]
