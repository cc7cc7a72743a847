"""Exception types shared across the package.

Everything user-facing derives from CoaxtailError so the CLI can map
failures onto exit codes without chasing individual modules.
"""


class CoaxtailError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(CoaxtailError, ValueError):
    """A configuration value or file is invalid or inconsistent."""


class LinearRangeError(CoaxtailError, ValueError):
    """Angle of attack outside the linear lift-curve validity range."""


class TableRangeError(CoaxtailError, ValueError):
    """Requested operating point falls outside tabulated data; no extrapolation."""


class InfeasibleError(CoaxtailError, ValueError):
    """No solution exists within the admissible range (trim, rpm solve, ...)."""


class NumericalDomainError(CoaxtailError, ArithmeticError):
    """Evaluation requested at or beyond a model singularity."""


class SimulationFault(CoaxtailError, RuntimeError):
    """The simulation produced non-finite state or violated a hard limit."""
