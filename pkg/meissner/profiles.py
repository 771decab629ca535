"""
Radial grid and the profiles that live on it.

Lengths are in units of the cylinder radius R, so the sample occupies
[0, 1] and the grid continues to rho_max outside it. Profiles are immutable:
their arrays are copied and marked read-only on construction.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Literal

import numpy as np

from .exceptions import DomainError, StructuralError
from .quadrature import integral

LOG = logging.getLogger(__name__)

Provenance = Literal["picard", "bessel_piecewise", "analytic_constant_g", "initial"]


def _frozen(values, n: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.shape != (n,):
        raise StructuralError(f"{name} has shape {arr.shape}, grid needs ({n},)")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RadialGrid:
    """
    Uniform nodes 0 = rho_0 < ... < rho_{n-1} = rho_max with node
    `boundary_index` sitting exactly on the cylinder surface rho = 1.
    """
    n: int
    boundary_index: int

    def __post_init__(self):
        if self.boundary_index < 2:
            raise DomainError("grid needs at least two cells inside the cylinder")
        if self.n <= self.boundary_index:
            raise DomainError(
                f"grid of {self.n} nodes ends before the cylinder boundary (node {self.boundary_index})"
            )

    @classmethod
    def create(cls, n: int, rho_max: float = 1.0) -> "RadialGrid":
        """
        Grid with n nodes reaching (approximately) rho_max.

        The spacing is snapped to 1/m with m = round((n-1)/rho_max) so the
        boundary is a node; the reached radius is then (n-1)/m.
        """
        if n < 3:
            raise DomainError(f"grid needs at least 3 nodes, got {n}")
        if rho_max < 1.0:
            raise DomainError(f"rho_max must be >= 1 (units of R), got {rho_max}")
        m = max(2, int(round((n - 1) / rho_max)))
        grid = cls(n=n, boundary_index=m)
        if abs(grid.rho_max - rho_max) > 1e-12 * rho_max:
            LOG.debug(f"grid radius snapped from {rho_max} to {grid.rho_max} so that rho=1 is a node")
        return grid

    @classmethod
    def with_spacing(cls, cells_inside: int, rho_max: float) -> "RadialGrid":
        """Grid with `cells_inside` cells on [0, 1], continued to at least rho_max"""
        n = int(np.ceil(rho_max * cells_inside - 1e-9)) + 1
        return cls(n=max(n, cells_inside + 1), boundary_index=cells_inside)

    @property
    def spacing(self) -> float:
        return 1.0 / self.boundary_index

    @property
    def rho_max(self) -> float:
        return (self.n - 1) / self.boundary_index

    @cached_property
    def nodes(self) -> np.ndarray:
        # i/m keeps node m exactly at 1.0
        arr = np.arange(self.n, dtype=float) / self.boundary_index
        arr.setflags(write=False)
        return arr

    @property
    def inside(self) -> np.ndarray:
        """Nodes on [0, 1]"""
        return self.nodes[: self.boundary_index + 1]

    def extended_to(self, rho_max: float) -> "RadialGrid":
        """Same spacing, continued to at least rho_max (never shortened)"""
        if rho_max <= self.rho_max:
            return self
        return RadialGrid.with_spacing(self.boundary_index, rho_max)

    def require_same(self, other: "RadialGrid", what: str = "profiles") -> None:
        if self != other:
            raise StructuralError(
                f"{what} live on different grids: (n={self.n}, m={self.boundary_index}) "
                f"vs (n={other.n}, m={other.boundary_index})"
            )

    def cylinder_integral(self, values: np.ndarray) -> float:
        """2 int_0^1 f(rho) rho drho, the cylinder average of f"""
        m = self.boundary_index
        return 2.0 * integral(np.asarray(values)[: m + 1] * self.inside, self.spacing)


@dataclass(frozen=True)
class DensityProfile:
    """Dimensionless density g(rho) = pi R^2 L |phi(rho)|^2, non-negative"""
    grid: RadialGrid
    g: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.g, self.grid.n, "density g")
        if np.any(arr < 0.0):
            raise DomainError(f"density must be non-negative, min is {arr.min():.3e}")
        object.__setattr__(self, "g", arr)

    @classmethod
    def uniform(cls, grid: RadialGrid, s: float) -> "DensityProfile":
        return cls(grid, np.full(grid.n, float(s)))

    @classmethod
    def from_function(cls, grid: RadialGrid, func: Callable[[np.ndarray], np.ndarray]) -> "DensityProfile":
        return cls(grid, func(grid.nodes))

    @property
    def inside(self) -> np.ndarray:
        return self.g[: self.grid.boundary_index + 1]

    def cylinder_mass(self) -> float:
        """2 int_0^1 g rho drho; equals 1 for a cylinder-normalized density"""
        return self.grid.cylinder_integral(self.g)

    def mixed_with(self, other: "DensityProfile", weight: float) -> "DensityProfile":
        """weight * other + (1 - weight) * self"""
        self.grid.require_same(other.grid, "densities")
        return DensityProfile(self.grid, weight * other.g + (1.0 - weight) * self.g)


@dataclass(frozen=True)
class FieldProfile:
    """
    Magnetic induction B(rho) in units of H_c(R) = hbar/(e R^2).

    Outside the cylinder the profile holds the constant boundary value.
    """
    grid: RadialGrid
    b: np.ndarray
    boundary_b: float
    provenance: Provenance

    def __post_init__(self):
        arr = _frozen(self.b, self.grid.n, "field b")
        object.__setattr__(self, "b", arr)
        object.__setattr__(self, "boundary_b", float(self.boundary_b))

    @classmethod
    def from_inside(cls, grid: RadialGrid, inside: np.ndarray, boundary_b: float,
                    provenance: Provenance) -> "FieldProfile":
        """Build from values on [0, 1]; the exterior gets boundary_b"""
        m = grid.boundary_index
        full = np.full(grid.n, float(boundary_b))
        full[: m + 1] = inside
        full[m] = boundary_b
        return cls(grid, full, boundary_b, provenance)

    @classmethod
    def constant(cls, grid: RadialGrid, boundary_b: float) -> "FieldProfile":
        return cls(grid, np.full(grid.n, float(boundary_b)), boundary_b, "initial")

    @property
    def inside(self) -> np.ndarray:
        return self.b[: self.grid.boundary_index + 1]

    def sup_distance(self, other: "FieldProfile") -> float:
        """sup |B - B'| on [0, 1]"""
        self.grid.require_same(other.grid, "fields")
        return float(np.max(np.abs(self.inside - other.inside)))


@dataclass(frozen=True)
class AlphaProfile:
    """
    Gauge function alpha(rho) = e R a(rho) / hbar entering the radial potential.
    """
    grid: RadialGrid
    alpha: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.alpha, self.grid.n, "alpha")
        if abs(arr[0]) > 1e-12:
            raise DomainError(f"alpha must vanish on the axis, got {arr[0]:.3e}")
        object.__setattr__(self, "alpha", arr)

    @classmethod
    def homogeneous(cls, grid: RadialGrid, boundary_b: float) -> "AlphaProfile":
        """alpha = (b/2) rho, the uniform-field gauge"""
        return cls(grid, 0.5 * boundary_b * grid.nodes)

    @classmethod
    def from_vector_potential(cls, grid: RadialGrid, a: np.ndarray) -> "AlphaProfile":
        # in these units alpha and the dimensionless vector potential coincide
        return cls(grid, a)
