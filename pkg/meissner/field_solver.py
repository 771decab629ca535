"""
Magnetic induction inside the cylinder.

Solves rho dB/drho = kappa^2 g(rho) int_0^rho v B(v) dv with B(1) = b by
Picard iteration, provides the Bessel oracles (constant g, piecewise
constant g) and the exponential decay certificate.

Everything is dimensionless: rho in units of R, B in units of hbar/(e R^2),
kappa = R / penetration depth.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Optional, Tuple

import numpy as np
from scipy import special

from .exceptions import ConvergenceError, DomainError, InvariantViolationError
from .profiles import DensityProfile, FieldProfile, RadialGrid
from .quadrature import cumulative_integral
from .special_functions import bessel_i0_log, ratio_threshold

LOG = logging.getLogger(__name__)

DECAY_CONSTANT = 0.4389
MONOTONE_TOLERANCE = 1e-8
RATE_FLOOR = 1e-12

Scheme = Literal["axis", "contraction"]


@dataclass(frozen=True)
class DecayCertificate:
    """Exponential decay bounds on B at one radius"""
    b_point: float
    field_value: float
    integral_bound: float
    linear_bound: float
    asymptotic_ok: bool
    chain_holds: bool
    threshold: float

    def as_dict(self) -> dict:
        return {
            "b_point": self.b_point,
            "field_value": self.field_value,
            "integral_bound": self.integral_bound,
            "linear_bound": self.linear_bound,
            "asymptotic_ok": self.asymptotic_ok,
            "chain_holds": self.chain_holds,
            "threshold": self.threshold,
        }


def _check_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not np.isfinite(kappa) or kappa < 0.0:
        raise DomainError(f"kappa must be a finite non-negative number, got {kappa}")
    return kappa


def _screening_integral(b_inside: np.ndarray, g_inside: np.ndarray, grid: RadialGrid,
                        corrected: bool) -> np.ndarray:
    """int_0^rho du g(u)/u int_0^u dv v B(v) at every node of [0, 1]"""
    rho = grid.inside
    h = grid.spacing
    inner = cumulative_integral(rho * b_inside, h, corrected)
    # inner ~ B(0) u^2 / 2 near the axis, so inner/u -> 0 there
    flux_ratio = np.zeros_like(inner)
    flux_ratio[1:] = inner[1:] / rho[1:]
    return cumulative_integral(g_inside * flux_ratio, h, corrected)


def apply_contraction(b_in: FieldProfile, g: DensityProfile, kappa: float,
                      corrected: bool = True) -> FieldProfile:
    """
    One application of (AB)(rho) = b - kappa^2 int_rho^1 du g(u)/u int_0^u dv v B(v).

    Args:
        b_in: Current field profile
        g: Density on the same grid
        kappa: Screening strength R/delta
        corrected: End-corrected trapezoid (default) or plain trapezoid

    Returns:
        The image profile, with boundary_b carried over
    """
    kappa = _check_kappa(kappa)
    b_in.grid.require_same(g.grid, "field and density")
    running = _screening_integral(b_in.inside, g.inside, b_in.grid, corrected)
    image = b_in.boundary_b - kappa * kappa * (running[-1] - running)
    return FieldProfile.from_inside(b_in.grid, image, b_in.boundary_b, "picard")


def field_residual(b: FieldProfile, g: DensityProfile, kappa: float, corrected: bool = True) -> float:
    """sup |B - A(B)| on [0, 1]"""
    return b.sup_distance(apply_contraction(b, g, kappa, corrected))


def contraction_window(g: DensityProfile, kappa: float) -> float:
    """
    Width a of the boundary window [1 - a, 1] on which A has Lipschitz
    constant kappa^2 sup(g) a^2 <= 1/4.
    """
    kappa = _check_kappa(kappa)
    peak = float(np.max(g.inside))
    if kappa == 0.0 or peak == 0.0:
        return 1.0
    return min(1.0, 0.5 / (kappa * np.sqrt(peak)))


def check_field_invariants(field: FieldProfile, tolerance: Optional[float] = None) -> None:
    """
    Raise InvariantViolationError unless 0 <= B <= b on [0, 1] and B does
    not decrease towards the surface.
    """
    b = field.boundary_b
    eps = MONOTONE_TOLERANCE * b if tolerance is None else tolerance
    inside = field.inside
    below = float(-inside.min())
    if below > eps:
        raise InvariantViolationError("field_nonnegative", below, f"B dips to {-below:.3e}")
    above = float(inside.max() - b)
    if above > eps:
        raise InvariantViolationError("field_bounded", above, f"B exceeds boundary value {b}")
    # largest B(rho_i) - B(rho_j) over i < j
    drop = float(np.max(np.maximum.accumulate(inside) - inside))
    if drop > eps:
        raise InvariantViolationError("field_monotone", drop, "B decreases towards the surface")


def solve_picard(g: DensityProfile, kappa: float, boundary_b: float, tol: float = 1e-10,
                 max_iter: int = 500, scheme: Scheme = "axis", relaxation: float = 1.0,
                 corrected: bool = True) -> FieldProfile:
    """
    Fixed point B = A(B) by Picard iteration from the constant profile.

    scheme="axis" iterates the equivalent Volterra form
    B(rho) = B(0) + kappa^2 int_0^rho g/u int_0^u v B, rescaled after each
    sweep so that B(1) = boundary_b; it converges for every kappa.
    scheme="contraction" iterates A itself, optionally under-relaxed,
    which only converges where A is a contraction.

    Args:
        g: Density profile
        kappa: Screening strength R/delta
        boundary_b: Field at the surface, > 0
        tol: Sup-norm tolerance on successive iterates
        max_iter: Iteration cap
        scheme: "axis" or "contraction"
        relaxation: Under-relaxation factor in (0, 1] for the contraction scheme
        corrected: End-corrected trapezoid (default) or plain trapezoid

    Returns:
        Converged field profile (provenance "picard")
    """
    kappa = _check_kappa(kappa)
    if not boundary_b > 0.0:
        raise DomainError(f"boundary_b must be positive, got {boundary_b}")
    if not 0.0 < relaxation <= 1.0:
        raise DomainError(f"relaxation must lie in (0, 1], got {relaxation}")
    grid = g.grid
    g_inside = g.inside
    current = np.full(grid.boundary_index + 1, float(boundary_b))

    if kappa == 0.0 or not np.any(g_inside > 0.0):
        return FieldProfile.from_inside(grid, current, boundary_b, "picard")

    k2 = kappa * kappa
    diff = np.inf
    for iteration in range(1, max_iter + 1):
        if scheme == "axis":
            shape = current[0] + k2 * _screening_integral(current, g_inside, grid, corrected)
            new = boundary_b * shape / shape[-1]
            diff = float(np.max(np.abs(new - current)))
            done = diff < tol
        elif scheme == "contraction":
            running = _screening_integral(current, g_inside, grid, corrected)
            image = boundary_b - k2 * (running[-1] - running)
            new = (1.0 - relaxation) * current + relaxation * image
            diff = float(np.max(np.abs(new - current)))
            done = diff < tol * relaxation
            if not np.isfinite(diff) or diff > 1e6 * boundary_b:
                raise ConvergenceError("contraction iteration diverged", diff, iteration)
        else:
            raise DomainError(f"unknown Picard scheme '{scheme}'")
        current = new
        LOG.debug(f"picard[{scheme}] iteration {iteration}: sup change {diff:.3e}")
        if done:
            break
    else:
        raise ConvergenceError(f"Picard iteration ({scheme}) did not converge", diff, max_iter)

    field = FieldProfile.from_inside(grid, current, boundary_b, "picard")
    residual = field_residual(field, g, kappa, corrected)
    if residual >= 10.0 * tol:
        raise ConvergenceError("fixed point fails the a-posteriori residual check", residual, iteration)
    check_field_invariants(field)
    LOG.debug(f"picard converged in {iteration} iterations, residual {residual:.3e}")
    return field


def analytic_constant_g(s: float, kappa: float, boundary_b: float, grid: RadialGrid) -> FieldProfile:
    """B(rho) = b I0(kappa sqrt(s) rho) / I0(kappa sqrt(s)), the constant-density solution"""
    kappa = _check_kappa(kappa)
    if s <= 0.0:
        raise DomainError(f"constant density must be positive, got {s}")
    z = kappa * np.sqrt(s)
    inside = boundary_b * np.exp(bessel_i0_log(z * grid.inside) - bessel_i0_log(z))
    return FieldProfile.from_inside(grid, inside, boundary_b, "analytic_constant_g")


def _slab_solution(rate: float, lower: float, flux_ratio: float,
                   x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    ln B(x) - ln B(lower) and F(x)/B(x), F = int_0^x v B, inside one slab of
    constant rate k, given F/B at the lower edge.

    B = alpha I0(k rho) + beta K0(k rho); on the axis slab beta = 0.
    Exponentially scaled Bessel functions keep every term finite.
    """
    if rate < RATE_FLOOR:
        return np.zeros_like(x), flux_ratio + 0.5 * (x * x - lower * lower)
    z = rate * x
    if lower == 0.0:
        i0 = special.i0e(z)
        return z + np.log(i0), x * special.i1e(z) / (rate * i0)
    z0 = rate * lower
    source = rate * rate * flux_ratio
    # continuity of B (= 1 at the edge) and of F; the Wronskian is 1/z0
    alpha = z0 * special.k1e(z0) + source * special.k0e(z0)
    beta = z0 * special.i1e(z0) - source * special.i0e(z0)
    damp = np.exp(-2.0 * (z - z0))
    value = alpha * special.i0e(z) + beta * special.k0e(z) * damp
    flux = alpha * special.i1e(z) - beta * special.k1e(z) * damp
    return (z - z0) + np.log(value), x * flux / (rate * value)


def solve_piecewise_bessel(g: DensityProfile, step_delta: float, kappa: float,
                           boundary_b: float) -> FieldProfile:
    """
    Exact field for the density frozen to g(1 - j delta) on each slab
    [1 - (j+1) delta, 1 - j delta].

    Marches out from the axis carrying B and the flux int_0^rho v B
    continuously across the slab edges, then scales to B(1) = boundary_b.
    The last slab towards the axis is shorter when delta does not divide 1.
    """
    kappa = _check_kappa(kappa)
    if not 0.0 < step_delta < 1.0:
        raise DomainError(f"step_delta must lie in (0, 1), got {step_delta}")
    grid = g.grid
    rho = grid.inside
    full = int(np.floor(1.0 / step_delta + 1e-9))
    remainder = 1.0 - full * step_delta
    n_slabs = full + (1 if remainder > 1e-12 else 0)

    tops = 1.0 - step_delta * np.arange(n_slabs)
    rates = kappa * np.sqrt(np.interp(tops, rho, g.inside))
    lower = np.maximum(tops - step_delta, 0.0)
    lower[-1] = 0.0
    slab = np.clip(np.floor((1.0 - rho) / step_delta + 1e-9).astype(int), 0, n_slabs - 1)

    log_b = np.empty_like(rho)
    log_edge = 0.0
    flux_ratio = 0.0
    for j in range(n_slabs - 1, -1, -1):
        members = slab == j
        points = np.append(rho[members], tops[j])
        growth, ratio = _slab_solution(float(rates[j]), float(lower[j]), flux_ratio, points)
        log_b[members] = log_edge + growth[:-1]
        log_edge += float(growth[-1])
        flux_ratio = float(ratio[-1])

    log_b += np.log(boundary_b) - log_edge
    return FieldProfile.from_inside(grid, np.exp(log_b), boundary_b, "bessel_piecewise")


def vector_potential(b: FieldProfile, corrected: bool = True) -> np.ndarray:
    """
    a(rho) = (1/rho) int_0^rho v B(v) dv on the whole grid, with B held at
    boundary_b outside the cylinder; a(0) = 0.
    """
    grid = b.grid
    m = grid.boundary_index
    rho = grid.nodes
    flux = np.empty(grid.n)
    flux[: m + 1] = cumulative_integral(grid.inside * b.inside, grid.spacing, corrected)
    # exact continuation for the constant exterior field
    flux[m + 1:] = flux[m] + 0.5 * b.boundary_b * (rho[m + 1:] ** 2 - 1.0)
    a = np.zeros(grid.n)
    a[1:] = flux[1:] / rho[1:]
    return a


@lru_cache(maxsize=8)
def _decay_threshold(level: float) -> float:
    return ratio_threshold(level)


def decay_certificate(b: FieldProfile, g: DensityProfile, b_point: float, kappa: float,
                      c: float = DECAY_CONSTANT) -> DecayCertificate:
    """
    Check B(b_point) <= b exp(-kappa int_{b_point}^1 sqrt(g) / 2) <= b exp(-c kappa (1 - b_point)).

    The chain is only claimed when kappa * b_point exceeds the threshold p
    with I1(p)/I0(p) = 1/2; otherwise the certificate is informational.
    """
    kappa = _check_kappa(kappa)
    if not 0.0 < b_point <= 1.0:
        raise DomainError(f"b_point must lie in (0, 1], got {b_point}")
    b.grid.require_same(g.grid, "field and density")
    grid = b.grid
    rho = grid.inside
    root_mass = cumulative_integral(np.sqrt(g.inside), grid.spacing)
    tail = float(root_mass[-1] - np.interp(b_point, rho, root_mass))

    boundary_b = b.boundary_b
    field_value = float(np.interp(b_point, rho, b.inside))
    integral_bound = boundary_b * float(np.exp(-0.5 * kappa * tail))
    linear_bound = boundary_b * float(np.exp(-c * kappa * (1.0 - b_point)))
    if b_point == 1.0:
        integral_bound = linear_bound = boundary_b

    p = _decay_threshold(0.5)
    asymptotic_ok = kappa * b_point > p
    chain_holds = field_value <= integral_bound <= linear_bound
    if asymptotic_ok and not chain_holds:
        LOG.warning(
            f"decay chain fails at b={b_point}: B={field_value:.6e}, "
            f"integral bound={integral_bound:.6e}, linear bound={linear_bound:.6e}"
        )
    return DecayCertificate(
        b_point=float(b_point),
        field_value=field_value,
        integral_bound=integral_bound,
        linear_bound=linear_bound,
        asymptotic_ok=bool(asymptotic_ok),
        chain_holds=bool(chain_holds),
        threshold=p,
    )
