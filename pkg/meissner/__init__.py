"""
Semiclassical Meissner effect for a charged Bose gas in a cylinder.

Field solver, radial eigensolver, the self-consistent London state and the
physics post-processing built on them.
"""

__version__ = "0.1.0"

from .eigensolver import GroundState, gaussian_reference, ground_state
from .exceptions import (
    ConfigError,
    ConvergenceError,
    DiscretizationError,
    DomainError,
    InvariantViolationError,
    MeissnerError,
    StructuralError,
)
from .field_solver import decay_certificate, solve_picard, solve_piecewise_bessel
from .profiles import AlphaProfile, DensityProfile, FieldProfile, RadialGrid
from .self_consistent import SelfConsistentSolution, iterate

__all__ = [
    "AlphaProfile",
    "ConfigError",
    "ConvergenceError",
    "DensityProfile",
    "DiscretizationError",
    "DomainError",
    "FieldProfile",
    "GroundState",
    "InvariantViolationError",
    "MeissnerError",
    "RadialGrid",
    "SelfConsistentSolution",
    "StructuralError",
    "decay_certificate",
    "gaussian_reference",
    "ground_state",
    "iterate",
    "solve_picard",
    "solve_piecewise_bessel",
]
