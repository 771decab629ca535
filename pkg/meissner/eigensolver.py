"""
Ground state of the radial operator -u'' - u'/rho + V(rho) u = eps u.

Energies are in units of hbar^2/(2 m R^2). The k = 0 sector has
V = alpha^2 with u'(0) = 0; sectors k != 0 have V = (k + rho alpha)^2 / rho^2
with u(0) = 0. The operator is discretized by finite volumes, which keeps
it symmetric with respect to the rho drho measure, and the lowest
eigenpair is found by shifted inverse iteration on the symmetric
tridiagonal matrix.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Literal, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, eigvalsh_tridiagonal, solve_banded

from .exceptions import ConvergenceError, DiscretizationError, DomainError, StructuralError
from .profiles import AlphaProfile, DensityProfile, RadialGrid
from .quadrature import integral

LOG = logging.getLogger(__name__)

GAUSSIAN_FLOOR = 0.8779
NEGATIVE_ENERGY_LIMIT = -1e-10
RESHIFT_EVERY = 5
ROUNDOFF_FACTOR = 64.0

Outer = Literal["dirichlet", "neumann"]
Domain = Literal["extended", "cylinder"]


@dataclass(frozen=True)
class GroundState:
    """
    Lowest eigenpair of one angular sector.

    phi is cylinder-normalized, 2 int_0^1 phi^2 rho drho = 1; whatever lies
    outside rho = 1 is reported as tail_mass.
    """
    grid: RadialGrid
    phi: np.ndarray
    energy: float
    g: DensityProfile
    sector_k: int = 0
    tail_mass: float = 0.0
    emergent_sigma: float = 0.0
    outer: Outer = "dirichlet"
    domain: Domain = "extended"
    iterations: int = 0


@dataclass(frozen=True)
class _RadialOperator:
    grid: RadialGrid
    diag: np.ndarray
    off: np.ndarray
    weights: np.ndarray
    first: int
    stop: int


@dataclass
class ComparisonReport:
    """Outcome of comparing a London-state density g with the Gaussian h"""
    margin: np.ndarray
    min_margin: float
    ratio_drop: float
    ratio_ok: bool
    floor: float
    floor_bound: float
    floor_ok: bool

    @property
    def passed(self) -> bool:
        return self.ratio_ok and self.floor_ok

    def summary(self) -> Dict[str, float]:
        return {
            "min_margin": self.min_margin,
            "ratio_drop": self.ratio_drop,
            "ratio_ok": self.ratio_ok,
            "min_sqrt_g": self.floor,
            "floor_bound": self.floor_bound,
            "floor_ok": self.floor_ok,
        }


def confining_radius(a_flux: float, tail_decay: float = 20.0) -> float:
    """Radius at which exp(-a_flux rho^2) has fallen to exp(-tail_decay)"""
    if a_flux <= 0.0:
        raise DomainError(f"a_flux must be positive, got {a_flux}")
    return float(np.sqrt(tail_decay / a_flux))


def gaussian_reference(a_flux: float, grid: RadialGrid) -> GroundState:
    """
    Homogeneous-field ground state h = a/(1 - e^-a) exp(-a rho^2), energy 2a.

    Args:
        a_flux: b/2, in (0, 1/2]
        grid: Radial grid (the density is filled on every node)

    Returns:
        Closed-form GroundState with phi = sqrt(h)
    """
    if not 0.0 < a_flux <= 0.5:
        raise DomainError(f"a_flux must lie in (0, 1/2], got {a_flux}")
    rho = grid.nodes
    scale = a_flux / -np.expm1(-a_flux)
    h = scale * np.exp(-a_flux * rho * rho)
    return GroundState(
        grid=grid,
        phi=np.sqrt(h),
        energy=2.0 * a_flux,
        g=DensityProfile(grid, h),
        sector_k=0,
        tail_mass=float(np.exp(-a_flux) / -np.expm1(-a_flux)),
        emergent_sigma=float(a_flux),
        outer="dirichlet",
        domain="extended",
    )


def _assemble(alpha: AlphaProfile, sector_k: int, outer: Outer, domain: Domain) -> _RadialOperator:
    grid = alpha.grid
    a = alpha.alpha
    if domain == "cylinder":
        m = grid.boundary_index
        grid = RadialGrid(n=m + 1, boundary_index=m)
        a = a[: m + 1]
        outer = "neumann"
    elif domain != "extended":
        raise DomainError(f"unknown domain '{domain}'")
    if outer not in ("dirichlet", "neumann"):
        raise DomainError(f"unknown outer boundary condition '{outer}'")

    rho = grid.nodes
    h = grid.spacing
    n = grid.n
    faces = rho[:-1] + 0.5 * h

    weights = rho * h
    weights[0] = h * h / 8.0
    weights[-1] = (rho[-1] - 0.25 * h) * 0.5 * h

    stiffness = np.zeros(n)
    stiffness[:-1] += faces / h
    stiffness[1:] += faces / h
    coupling = -faces / h

    potential = np.empty(n)
    if sector_k == 0:
        potential[:] = a * a
    else:
        potential[0] = np.inf
        potential[1:] = (sector_k + rho[1:] * a[1:]) ** 2 / rho[1:] ** 2

    first = 0 if sector_k == 0 else 1
    stop = n if outer == "neumann" else n - 1
    w = weights[first:stop]
    diag = stiffness[first:stop] / w + potential[first:stop]
    off = coupling[first:stop - 1] / np.sqrt(w[:-1] * w[1:])
    return _RadialOperator(grid=grid, diag=diag, off=off, weights=w, first=first, stop=stop)


def _count_below(diag: np.ndarray, off: np.ndarray, level: float) -> int:
    """Number of eigenvalues of the tridiagonal matrix below `level` (Sturm count)"""
    lower = float(np.min(diag) - 2.0 * np.max(np.abs(off), initial=0.0) - 1.0)
    if level <= lower:
        return 0
    return len(eigvalsh_tridiagonal(diag, off, select="v", select_range=(lower, level)))


def _apply(diag: np.ndarray, off: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = diag * y
    out[:-1] += off * y[1:]
    out[1:] += off * y[:-1]
    return out


def _lowest_eigenpair(op: _RadialOperator, shift: float, tol: float,
                      max_iter: int) -> Tuple[float, np.ndarray, int]:
    diag, off = op.diag, op.off
    banded = np.zeros((3, len(diag)))
    banded[0, 1:] = off
    banded[2, :-1] = off

    # Rayleigh quotients cannot settle closer than the rounding of M y
    floor = ROUNDOFF_FACTOR * np.finfo(float).eps * float(np.max(np.abs(diag)))
    y = np.ones(len(diag)) / np.sqrt(len(diag))
    energy = float(y @ _apply(diag, off, y))
    previous = np.inf
    change = np.inf
    for iteration in range(1, max_iter + 1):
        banded[1] = diag - shift
        try:
            z = solve_banded((1, 1), banded, y)
        except LinAlgError:
            # shift is an eigenvalue to working precision
            LOG.debug(f"singular shift {shift:.15g} at iteration {iteration}")
            break
        if not np.all(np.isfinite(z)):
            break
        y = z / np.linalg.norm(z)
        energy = float(y @ _apply(diag, off, y))
        LOG.debug(f"inverse iteration {iteration}: eps = {energy:.15g}")
        change = abs(energy - previous)
        if change < max(tol * max(1.0, abs(energy)), floor):
            break
        previous = energy
        if iteration % RESHIFT_EVERY == 0 and _count_below(diag, off, energy) <= 1:
            shift = energy
    else:
        raise ConvergenceError("inverse iteration did not converge", change, max_iter)

    # polish the vector with one solve just below the converged eigenvalue
    banded[1] = diag - (energy - 1e-10 * max(1.0, abs(energy)))
    try:
        z = solve_banded((1, 1), banded, y)
        if np.all(np.isfinite(z)):
            y = z / np.linalg.norm(z)
            energy = float(y @ _apply(diag, off, y))
    except LinAlgError:
        pass

    if _count_below(diag, off, energy - 1e-8 * max(1.0, abs(energy))) > 0:
        raise ConvergenceError("inverse iteration settled on an excited state", energy, iteration)
    return energy, y, iteration


def ground_state(alpha: AlphaProfile, grid: Optional[RadialGrid] = None, outer: Outer = "dirichlet",
                 sector_k: int = 0, domain: Domain = "extended", tol: float = 1e-12,
                 max_iter: int = 500) -> GroundState:
    """
    Lowest eigenpair of the sector-k radial operator for the gauge alpha.

    Args:
        alpha: Gauge profile on the full grid
        grid: Optional grid, must match alpha's
        outer: Condition at the last node, "dirichlet" or "neumann"
        sector_k: Angular momentum sector
        domain: "extended" solves on [0, rho_max]; "cylinder" on [0, 1] with a free surface
        tol: Relative tolerance on the eigenvalue change
        max_iter: Iteration cap

    Returns:
        Cylinder-normalized, positive GroundState
    """
    if grid is not None:
        grid.require_same(alpha.grid, "grid and alpha")
    op = _assemble(alpha, sector_k, outer, domain)
    work = op.grid
    outer = "neumann" if domain == "cylinder" else outer
    shift = -1.0 if outer == "neumann" else 0.0
    energy, y, iterations = _lowest_eigenpair(op, shift, tol, max_iter)
    if energy < NEGATIVE_ENERGY_LIMIT:
        raise DiscretizationError(f"negative ground energy {energy:.3e} in sector {sector_k}")

    u = np.zeros(work.n)
    u[op.first:op.stop] = y / np.sqrt(op.weights)
    if u.sum() < 0.0:
        u = -u
    norm = work.cylinder_integral(u * u)
    if norm <= 0.0:
        raise StructuralError("ground state has no weight inside the cylinder")
    phi = u / np.sqrt(norm)

    m = work.boundary_index
    tail_mass = 2.0 * integral((phi * phi * work.nodes)[m:], work.spacing) if work.n > m + 1 else 0.0
    slope = np.gradient(phi, work.spacing, edge_order=2)[m]
    sigma = float(-slope / phi[m]) if phi[m] > 0.0 else float("inf")

    if domain == "extended" and outer == "dirichlet":
        wall = phi[-2] ** 2 / np.max(phi * phi)
        if wall > 1e-8:
            LOG.warning(
                f"ground state not confined: relative density {wall:.2e} next to rho_max={work.rho_max:.3f}"
            )
    LOG.debug(f"sector {sector_k} ({domain}/{outer}): eps = {energy:.12g} after {iterations} iterations")
    return GroundState(
        grid=work,
        phi=phi,
        energy=max(energy, 0.0),
        g=DensityProfile(work, phi * phi),
        sector_k=sector_k,
        tail_mass=float(tail_mass),
        emergent_sigma=sigma,
        outer=outer,
        domain=domain,
        iterations=iterations,
    )


def density_g(gs: GroundState) -> DensityProfile:
    """g = phi^2 under the cylinder normalization"""
    return gs.g


def eigen_residual(alpha: AlphaProfile, gs: GroundState) -> float:
    """||(M - eps) y|| / ||y|| for the symmetrized discrete operator and y = W^(1/2) phi"""
    op = _assemble(alpha, gs.sector_k, gs.outer, gs.domain)
    op.grid.require_same(gs.grid, "operator and ground state")
    y = np.sqrt(op.weights) * gs.phi[op.first:op.stop]
    r = _apply(op.diag, op.off, y) - gs.energy * y
    return float(np.linalg.norm(r) / np.linalg.norm(y))


def sector_energies(alpha: AlphaProfile, ks: Iterable[int], domain: Domain = "cylinder",
                    outer: Outer = "dirichlet") -> Dict[int, float]:
    """Ground energy of every sector in ks"""
    return {int(k): ground_state(alpha, outer=outer, sector_k=int(k), domain=domain).energy for k in ks}


def sector_check(alpha: AlphaProfile, k_range: Tuple[int, int] = (-1, 0), domain: Domain = "cylinder",
                 outer: Outer = "dirichlet") -> int:
    """
    Sector whose ground energy is lowest over k_range (inclusive); ties go
    to the k closest to 0.

    The default solves on the cylinder with a free surface at rho = 1; on
    the extended plane a homogeneous field makes all k <= 0 degenerate.
    """
    lo, hi = int(k_range[0]), int(k_range[1])
    if not lo <= -1 < 0 <= hi:
        raise DomainError(f"k_range must contain -1 and 0, got {k_range}")
    energies = sector_energies(alpha, range(lo, hi + 1), domain, outer)
    best = min(energies.values())
    slack = 1e-10 * max(1.0, abs(best))
    winner = min((k for k, e in energies.items() if e <= best + slack), key=lambda k: (abs(k), k))
    LOG.debug(f"sector check over [{lo}, {hi}]: k = {winner}, eps = {energies[winner]:.12g}")
    return winner


def comparison_check(g: DensityProfile, h: DensityProfile, eps_cmp: float = 1e-4,
                     ratio_tol: float = 1e-5) -> ComparisonReport:
    """
    Compare a London-state density g with the Gaussian reference h on [0, 1].

    Both are cylinder-normalized, so a pointwise g >= h can only hold with
    equality; the pointwise margin is reported as information. The checked
    statements are that g/h does not decrease towards the surface and that
    min sqrt(g) stays above max(0.8779, sqrt(h(1))).
    """
    g.grid.require_same(h.grid, "g and h")
    gi, hi = g.inside, h.inside
    margin = gi - hi
    ratio = gi / hi
    drop = float(np.max(np.maximum.accumulate(ratio) - ratio) / ratio[0])
    floor = float(np.sqrt(gi.min()))
    floor_bound = max(GAUSSIAN_FLOOR, float(np.sqrt(hi[-1])))
    report = ComparisonReport(
        margin=margin,
        min_margin=float(margin.min()),
        ratio_drop=drop,
        ratio_ok=drop <= ratio_tol,
        floor=floor,
        floor_bound=floor_bound,
        floor_ok=floor >= floor_bound - eps_cmp,
    )
    if not report.passed:
        LOG.warning(f"⚠️ comparison check failed: {report.summary()}")
    return report
