"""
Self-consistent London state: alternate the field solve and the ground-state
solve until the pair (B, phi) reproduces itself.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Iterable, List, Literal, Optional, Tuple

import numpy as np
import pandas as pd

from .eigensolver import GroundState, confining_radius, eigen_residual, gaussian_reference, ground_state, sector_check
from .exceptions import DomainError, InvariantViolationError, MeissnerError
from .field_solver import Scheme, field_residual, solve_picard, vector_potential
from .profiles import AlphaProfile, DensityProfile, FieldProfile, RadialGrid

LOG = logging.getLogger(__name__)

Start = Literal["gaussian", "flat"]


@dataclass
class SelfConsistentSolution:
    """Outcome of one self-consistent run; converged=False is a valid result"""
    kappa: float
    boundary_b: float
    field: Optional[FieldProfile]
    ground: Optional[GroundState]
    iterations: int
    field_residual: float
    eigen_residual: float
    converged: bool
    history: List[Tuple[int, float]] = dc_field(default_factory=list)
    sector_k: int = 0
    regime_violation: bool = False
    failure: Optional[str] = None

    @property
    def alpha(self) -> AlphaProfile:
        return AlphaProfile.from_vector_potential(self.field.grid, vector_potential(self.field))

    @property
    def energy(self) -> float:
        return self.ground.energy if self.ground is not None else float("nan")


def confined_grid(base: RadialGrid, boundary_b: float, tail_decay: float = 20.0) -> RadialGrid:
    """base continued (same spacing) far enough to confine the ground state at field boundary_b"""
    return base.extended_to(confining_radius(0.5 * boundary_b, tail_decay))


def _pair_residuals(field: FieldProfile, alpha: AlphaProfile, ground: GroundState,
                    kappa: float) -> Tuple[float, float]:
    return field_residual(field, ground.g, kappa), eigen_residual(alpha, ground)


def iterate(kappa: float, boundary_b: float, grid: RadialGrid, tol: float = 1e-8, max_iter: int = 500,
            mixing: float = 0.5, scheme: Scheme = "axis", relaxation: float = 1.0,
            start: Start = "gaussian", check_sector: bool = True) -> SelfConsistentSolution:
    """
    Alternate B <- field(g), phi <- ground state(alpha(B)), g <- mix(g, phi^2).

    The run counts as converged once B stops changing by more than tol and
    both residuals of the current pair, sup |B - A(B; phi^2)| and the
    relative eigen-residual, are below tol.

    Args:
        kappa: Screening strength R/delta (0 decouples the equations)
        boundary_b: Surface field in units of hbar/(e R^2), in (0, 1)
        grid: Radial grid shared by field and ground state
        tol: Convergence tolerance
        max_iter: Cap on outer iterations
        mixing: Weight of the new density in the linear mix
        scheme: Picard scheme for the field solve
        relaxation: Under-relaxation for the contraction scheme
        start: "gaussian" starts from h at a_flux = b/2, "flat" from g = 1
        check_sector: Solve the k = -1 sector every iteration and stop if it wins

    Returns:
        SelfConsistentSolution with the full history
    """
    if kappa < 0.0:
        raise DomainError(f"kappa must be non-negative, got {kappa}")
    if not 0.0 < boundary_b < 1.0:
        raise DomainError(f"boundary_b must lie in (0, 1), got {boundary_b}")
    if not 0.0 < mixing <= 1.0:
        raise DomainError(f"mixing must lie in (0, 1], got {mixing}")

    if start == "gaussian":
        g = gaussian_reference(0.5 * boundary_b, grid).g
    else:
        g = DensityProfile.uniform(grid, 1.0)
    picard_tol = max(1e-2 * tol, 1e-13)

    solution = SelfConsistentSolution(
        kappa=kappa, boundary_b=boundary_b, field=None, ground=None, iterations=0,
        field_residual=float("inf"), eigen_residual=float("inf"), converged=False,
    )
    previous = FieldProfile.constant(grid, boundary_b)
    for iteration in range(1, max_iter + 1):
        try:
            field = solve_picard(g, kappa, boundary_b, tol=picard_tol, scheme=scheme, relaxation=relaxation)
            alpha = AlphaProfile.from_vector_potential(grid, vector_potential(field))
            if check_sector:
                k = sector_check(alpha)
                if k != 0:
                    solution.sector_k = k
                    solution.regime_violation = True
                    solution.failure = f"sector k={k} undercuts k=0"
                    LOG.warning(f"⚠️ regime violation at iteration {iteration}: ground state left the k=0 sector")
                    break
            ground = ground_state(alpha, grid)
            g_new = ground.g
            change_b = field.sup_distance(previous)
            change_g = float(np.max(np.abs(g_new.inside - g.inside)))
            res_field, res_eigen = _pair_residuals(field, alpha, ground, kappa)
        except InvariantViolationError as exc:
            solution.regime_violation = True
            solution.failure = str(exc)
            LOG.warning(f"⚠️ field left the screening regime at iteration {iteration}: {exc}")
            break
        except MeissnerError as exc:
            solution.failure = f"{type(exc).__name__}: {exc}"
            LOG.warning(f"⚠️ iteration {iteration} failed: {solution.failure}")
            break

        solution.field, solution.ground = field, ground
        solution.iterations = iteration
        solution.field_residual, solution.eigen_residual = res_field, res_eigen
        solution.history.append((iteration, max(change_b, change_g)))
        LOG.debug(
            f"scf {iteration}: dB={change_b:.3e} dg={change_g:.3e} "
            f"res_B={res_field:.3e} res_phi={res_eigen:.3e} eps={ground.energy:.10g}"
        )
        if change_b < tol and res_field < tol and res_eigen < tol:
            solution.converged = True
            break
        g = g.mixed_with(g_new, mixing)
        previous = field

    if solution.converged:
        LOG.info(
            f"✅ self-consistent state at kappa={kappa}, b={boundary_b} after {solution.iterations} "
            f"iterations (eps={solution.energy:.10g})"
        )
    else:
        LOG.warning(f"⚠️ no self-consistent state at kappa={kappa}, b={boundary_b} ({solution.failure or 'max_iter'})")
    return solution


def residuals(sol: SelfConsistentSolution) -> Tuple[float, float]:
    """Field and eigen residuals of the final pair, recomputed from scratch"""
    if sol.field is None or sol.ground is None:
        return float("inf"), float("inf")
    alpha = AlphaProfile.from_vector_potential(sol.field.grid, vector_potential(sol.field))
    return _pair_residuals(sol.field, alpha, sol.ground, sol.kappa)


def initial_data_sensitivity(kappa: float, boundary_b: float, grid: RadialGrid, **kwargs) -> float:
    """
    sup distance between the fields reached from the Gaussian start and from
    the flat start g = 1; inf if either run fails.
    """
    runs = [iterate(kappa, boundary_b, grid, start=start, **kwargs) for start in ("gaussian", "flat")]
    if not all(run.converged for run in runs):
        LOG.warning(f"⚠️ sensitivity at kappa={kappa}, b={boundary_b}: a run did not converge")
        return float("inf")
    return runs[0].field.sup_distance(runs[1].field)


def _region_point(task: Tuple[float, float, int, float, float, bool, float, int, float]) -> dict:
    kappa, b, cells, rho_max, tail_decay, extend, tol, max_iter, mixing = task
    grid = RadialGrid.with_spacing(cells, rho_max)
    if extend:
        grid = confined_grid(grid, b, tail_decay)
    try:
        sol = iterate(kappa, b, grid, tol=tol, max_iter=max_iter, mixing=mixing)
    except MeissnerError as exc:
        LOG.warning(f"⚠️ point kappa={kappa}, b={b} failed: {exc}")
        sol = SelfConsistentSolution(kappa=kappa, boundary_b=b, field=None, ground=None, iterations=0,
                                     field_residual=float("inf"), eigen_residual=float("inf"),
                                     converged=False, failure=str(exc))
    return {
        "kappa": kappa,
        "boundary_b": b,
        "converged": sol.converged,
        "iterations": sol.iterations,
        "field_residual": sol.field_residual,
        "eigen_residual": sol.eigen_residual,
        "regime_violation": sol.regime_violation,
        "energy": sol.energy,
    }


def convergence_region(kappas: Iterable[float], b_values: Iterable[float], grid: RadialGrid,
                       tol: float = 1e-8, max_iter: int = 500, mixing: float = 0.5, workers: int = 1,
                       extend: bool = True, tail_decay: float = 20.0) -> pd.DataFrame:
    """
    Run the self-consistent loop on every (kappa, b) point and tabulate the
    outcome. Rows come back sorted by (kappa, boundary_b) whatever the
    completion order.
    """
    tasks = [
        (float(k), float(b), grid.boundary_index, grid.rho_max, tail_decay, extend, tol, max_iter, mixing)
        for k in kappas for b in b_values
    ]
    LOG.info(f"🗺️ mapping convergence region over {len(tasks)} points with {workers} worker(s)")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_region_point, tasks))
    else:
        rows = [_region_point(task) for task in tasks]
    return pd.DataFrame(rows).sort_values(["kappa", "boundary_b"]).reset_index(drop=True)
