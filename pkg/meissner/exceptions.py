"""
Error types raised by the Meissner solvers.
The CLI maps them onto exit codes (see cli.EXIT_*).
"""

from typing import Optional


class MeissnerError(Exception):
    """Base class for all solver errors"""


class DomainError(MeissnerError, ValueError):
    """Argument outside the mathematical domain of an operation"""


class StructuralError(MeissnerError, ValueError):
    """Profiles that do not fit together (different grids, wrong lengths)"""


class ConfigError(MeissnerError, ValueError):
    """Invalid run configuration"""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class ConvergenceError(MeissnerError, RuntimeError):
    """Iteration stopped before reaching its tolerance"""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual={residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


class InvariantViolationError(MeissnerError, RuntimeError):
    """A computed profile breaks one of the model's invariants"""

    def __init__(self, name: str, worst: float, message: str = ""):
        text = f"invariant '{name}' violated by {worst:.3e}"
        if message:
            text = f"{text}: {message}"
        super().__init__(text)
        self.name = name
        self.worst = worst


class DiscretizationError(MeissnerError, RuntimeError):
    """The discretized operator produced an unphysical result"""
