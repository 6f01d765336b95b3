"""Truncated Fock-space model of heralded micro-macro path entanglement."""

from . import channels, fock
from .errors import ConvergenceError, TruncationError, UndefinedValueError

__version__ = "0.1.0"

__all__ = ["ConvergenceError", "TruncationError", "UndefinedValueError", "channels", "fock"]
