"""
Physics post-processing on top of the self-consistent solver.

Ground-energy sweeps, the magnetization slope tau, critical fields in SI
units, the phase of an applied field, the penetration depth and the
London current of a converged state.
"""

import logging
from dataclasses import dataclass
from typing import Literal, NamedTuple, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy import constants

from .exceptions import DomainError, InvariantViolationError, StructuralError
from .profiles import RadialGrid
from .quadrature import integral
from .self_consistent import SelfConsistentSolution, convergence_region

LOG = logging.getLogger(__name__)

TAU_SLOPE_TOLERANCE = 1e-6

Phase = Literal["expelled", "surface_decay", "penetrating"]
Curve = Union[pd.DataFrame, Sequence[Tuple[float, float]]]


class PhysicalParams(BaseModel):
    """SI parameters of the pair gas and the sample"""
    model_config = ConfigDict(extra="forbid")

    particle_mass: float = Field(2.0 * constants.m_e, gt=0, description="pair mass in kg")
    charge: float = Field(2.0 * constants.e, gt=0, description="pair charge in C")
    density_d: float = Field(1e27, gt=0, description="pairs per m^3")
    radius_r: float = Field(1e-6, gt=0, description="cylinder radius in m")
    vacuum_mu0: float = Field(constants.mu_0, gt=0)
    vacuum_eps0: float = Field(constants.epsilon_0, gt=0)
    light_c: float = Field(constants.c, gt=0)


class CriticalFields(NamedTuple):
    """Critical applied fields in A/m"""
    H0: float
    HcR: float
    Hc0: float

    def in_tesla(self, mu0: float = constants.mu_0) -> dict:
        return {"mu0_H0": mu0 * self.H0, "mu0_HcR": mu0 * self.HcR, "mu0_Hc0": mu0 * self.Hc0}


@dataclass(frozen=True)
class PhaseReport:
    """
    Phase of the sample at one applied field.

    H = H0 counts as expelled and H = H0 + HcR as penetrating.
    """
    applied_H: float
    H0: float
    HcR: float
    Hc0: float
    phase: Phase
    boundary_Bf: float

    def as_dict(self) -> dict:
        return {
            "applied_H": self.applied_H,
            "H0": self.H0,
            "HcR": self.HcR,
            "Hc0": self.Hc0,
            "phase": self.phase,
            "boundary_Bf": self.boundary_Bf,
        }


def energy_sweep(kappa: float, b_values: Sequence[float], grid: RadialGrid, tol: float = 1e-8,
                 max_iter: int = 500, mixing: float = 0.5, workers: int = 1, extend: bool = True,
                 tail_decay: float = 20.0) -> pd.DataFrame:
    """
    Self-consistent ground energy for each surface field.

    Args:
        kappa: Screening strength
        b_values: Surface fields, each in (0, 1)
        grid: Base grid; with extend=True each point continues it to the confining radius
        tol: Self-consistency tolerance
        max_iter: Iteration cap per point
        mixing: Density mixing weight
        workers: Worker processes
        extend: Extend the grid per point
        tail_decay: Gaussian decay exponent defining the confining radius

    Returns:
        DataFrame with columns b_tilde, energy, converged, iterations sorted by b_tilde;
        energy is NaN where the point did not converge
    """
    b_values = [float(b) for b in b_values]
    bad = [b for b in b_values if not 0.0 < b < 1.0]
    if bad:
        raise DomainError(f"sweep fields must lie in (0, 1), got {bad}")
    table = convergence_region([kappa], b_values, grid, tol=tol, max_iter=max_iter, mixing=mixing,
                               workers=workers, extend=extend, tail_decay=tail_decay)
    curve = pd.DataFrame({
        "b_tilde": table["boundary_b"],
        "energy": table["energy"].where(table["converged"]),
        "converged": table["converged"],
        "iterations": table["iterations"],
    })
    gaps = curve.loc[~curve["converged"], "b_tilde"].tolist()
    if gaps:
        LOG.warning(f"⚠️ sweep has gaps at b = {gaps}")
    energies = curve["energy"].dropna().to_numpy()
    if np.any(np.diff(energies) < 0.0):
        LOG.warning("⚠️ ground energy is not monotone in b over the sweep")
    return curve


def _curve_points(curve: Curve) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(curve, pd.DataFrame):
        b, e = curve["b_tilde"].to_numpy(float), curve["energy"].to_numpy(float)
    else:
        pairs = np.asarray(curve, dtype=float).reshape(-1, 2)
        b, e = pairs[:, 0], pairs[:, 1]
    keep = np.isfinite(e) & (b > 0.0)
    order = np.argsort(b[keep])
    return b[keep][order], e[keep][order]


def magnetization_tau(curve: Curve, tol_slope: float = TAU_SLOPE_TOLERANCE) -> float:
    """
    tau = d eps / d b at b -> 0+.

    The one-sided quotients eps(b)/b at the two smallest fields (eps(0) = 0)
    are extrapolated linearly to b = 0.
    """
    b, e = _curve_points(curve)
    if len(b) < 3:
        raise StructuralError(f"tau needs at least 3 sweep points with b > 0, got {len(b)}")
    (b1, b2), (q1, q2) = b[:2], e[:2] / b[:2]
    tau = (b2 * q1 - b1 * q2) / (b2 - b1)
    if tau < -tol_slope:
        raise InvariantViolationError("tau_nonnegative", -tau, f"magnetization slope tau = {tau:.3e} < 0")
    return max(float(tau), 0.0)


def slope_curve(curve: Curve) -> pd.DataFrame:
    """Finite-difference slope d eps / d b between neighbouring sweep points"""
    b, e = _curve_points(curve)
    return pd.DataFrame({"b_mid": 0.5 * (b[1:] + b[:-1]), "slope": np.diff(e) / np.diff(b)})


def slope_increasing(slopes: pd.DataFrame) -> bool:
    """Whether the sampled slope increases strictly with b"""
    return bool(np.all(np.diff(slopes["slope"].to_numpy()) > 0.0))


def critical_fields(params: PhysicalParams, tau_dimensionless: float) -> CriticalFields:
    """
    H0 = d tau_SI, HcR = hbar/(e R^2)/mu0 and Hc0 = H0 + HcR, all in A/m.

    tau_SI = tau hbar e / (2 m) converts the dimensionless slope (energy in
    hbar^2/(2 m R^2) per field in hbar/(e R^2)) to J/T.
    """
    if tau_dimensionless < 0.0:
        raise DomainError(f"tau must be non-negative, got {tau_dimensionless}")
    tau_si = tau_dimensionless * constants.hbar * params.charge / (2.0 * params.particle_mass)
    h0 = params.density_d * tau_si
    hcr = constants.hbar / (params.charge * params.radius_r ** 2) / params.vacuum_mu0
    return CriticalFields(H0=h0, HcR=hcr, Hc0=h0 + hcr)


def phase_classify(applied_H: float, H0: float, HcR: float) -> PhaseReport:
    """Phase of the sample and boundary induction B_f = max(H - H0, 0)"""
    if H0 < 0.0 or HcR < 0.0:
        raise DomainError(f"critical fields must be non-negative, got H0={H0}, HcR={HcR}")
    hc0 = H0 + HcR
    if applied_H <= H0:
        phase: Phase = "expelled"
    elif applied_H < hc0:
        phase = "surface_decay"
    else:
        phase = "penetrating"
    return PhaseReport(
        applied_H=float(applied_H), H0=float(H0), HcR=float(HcR), Hc0=hc0,
        phase=phase, boundary_Bf=max(float(applied_H) - H0, 0.0),
    )


def thermodynamic_induction(applied_H: float, H0: float) -> float:
    """Large-sample limit: no induction below H0, H - H0 above"""
    return 0.0 if applied_H < H0 else float(applied_H - H0)


def penetration_depth(params: PhysicalParams) -> Tuple[float, float]:
    """delta = sqrt(eps0 m c^2 / (d e^2)) in meters, and kappa = R / delta"""
    delta = float(np.sqrt(
        params.vacuum_eps0 * params.particle_mass * params.light_c ** 2
        / (params.density_d * params.charge ** 2)
    ))
    return delta, params.radius_r / delta


def _require_field(sol: SelfConsistentSolution) -> None:
    if sol.field is None or sol.ground is None:
        raise StructuralError("solution carries no field/ground-state pair")


def current_profile(sol: SelfConsistentSolution) -> np.ndarray:
    """London current j = -g a on [0, 1]; zero outside the sample"""
    _require_field(sol)
    grid = sol.field.grid
    m = grid.boundary_index
    j = np.zeros(grid.n)
    j[: m + 1] = -sol.ground.g.inside * sol.alpha.alpha[: m + 1]
    return j


def magnetization_profile(sol: SelfConsistentSolution) -> np.ndarray:
    """M = B - b, diamagnetic inside and zero outside"""
    _require_field(sol)
    return sol.field.b - sol.field.boundary_b


def surface_current(sol: SelfConsistentSolution) -> float:
    """Sheet current int_0^1 j drho; equals -(b - B(0))/kappa^2 by Ampere's law"""
    j = current_profile(sol)
    grid = sol.field.grid
    return integral(j[: grid.boundary_index + 1], grid.spacing)
