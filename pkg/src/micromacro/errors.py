"""Exception types raised by the simulation kernels."""


class TruncationError(ValueError):
    """The truncated photon-number basis is too small for the requested accuracy."""


class ConvergenceError(RuntimeError):
    """A numerical average did not converge when its resolution was increased."""


class UndefinedValueError(ValueError):
    """A quantity was requested at a point where it is not defined (e.g. 0/0)."""
