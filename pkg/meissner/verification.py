"""
Invariant suite behind ``mode=verify``.

Each check returns a CheckResult instead of raising, so one run reports
every failure at once.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
import pandas as pd
from scipy import special

from .eigensolver import comparison_check, gaussian_reference, ground_state, sector_check
from .exceptions import MeissnerError
from .field_solver import analytic_constant_g, check_field_invariants, decay_certificate, solve_piecewise_bessel, solve_picard
from .meissner_analysis import PhysicalParams, critical_fields, penetration_depth, phase_classify
from .profiles import AlphaProfile, DensityProfile, RadialGrid
from .self_consistent import confined_grid, iterate, residuals
from .special_functions import bessel_i0, bessel_i1, ratio_threshold

LOG = logging.getLogger(__name__)

VERIFY_KAPPA = 10.0
FIELD_KAPPAS = (0.5, 1.0, 2.0, 5.0, 10.0, 20.0)
FIELD_BS = (0.1, 0.5, 0.9)
STEP_DELTAS = (0.1, 0.05, 0.025)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    detail: str = ""


@dataclass
class VerificationReport:
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "check": [c.name for c in self.checks],
                "passed": [c.passed for c in self.checks],
                "worst": [c.worst for c in self.checks],
                "detail": [c.detail for c in self.checks],
            }
        )


def check_bessel_oracle() -> CheckResult:
    z = np.concatenate([np.linspace(0.0, 19.9, 200), np.linspace(20.0, 600.0, 200)])
    rel0 = np.abs(bessel_i0(z) / special.i0(z) - 1.0)
    rel1 = np.abs(bessel_i1(z[1:]) / special.i1(z[1:]) - 1.0)
    worst = float(max(rel0.max(), rel1.max()))
    return CheckResult("bessel_oracle", worst < 1e-12, worst, "relative error against scipy.special")


def check_ratio_threshold() -> CheckResult:
    p = ratio_threshold(0.5)
    miss = abs(special.i1(p) / special.i0(p) - 0.5)
    ok = miss < 1e-6 and 1.1 < p < 1.2
    return CheckResult("ratio_threshold", ok, float(miss), f"p = {p:.10f}")


def check_picard_oracle() -> CheckResult:
    grid = RadialGrid.create(4001, 1.0)
    g = DensityProfile.uniform(grid, 1.0)
    worst = 0.0
    for kappa in (1.0, 5.0, 10.0):
        picard = solve_picard(g, kappa, 1.0)
        exact = analytic_constant_g(1.0, kappa, 1.0, grid)
        worst = max(worst, picard.sup_distance(exact))
    return CheckResult("picard_bessel_oracle", worst < 1e-6, worst, "kappa in {1, 5, 10}, n = 4001")


def check_gaussian_eigen(grid: RadialGrid) -> CheckResult:
    grid = confined_grid(grid, 1.0)
    reference = gaussian_reference(0.5, grid)
    gs = ground_state(AlphaProfile(grid, 0.5 * grid.nodes))
    m = grid.boundary_index
    energy_miss = abs(gs.energy - 1.0)
    phi_miss = float(np.max(np.abs(gs.phi[: m + 1] - reference.phi[: m + 1])))
    ends = abs(np.sqrt(reference.g.g[m]) - 0.8779) < 1e-4 and abs(np.sqrt(reference.g.g[0]) - 1.1272) < 1e-4
    worst = max(energy_miss, phi_miss)
    return CheckResult("gaussian_eigen_oracle", worst < 1e-4 and ends, worst, f"eps = {gs.energy:.10f}")


def check_field_bounds(grid: RadialGrid) -> CheckResult:
    worst = 0.0
    failures = []
    for b in FIELD_BS:
        g = gaussian_reference(0.5 * b, grid).g
        for kappa in FIELD_KAPPAS:
            try:
                check_field_invariants(solve_picard(g, kappa, b))
            except MeissnerError as exc:
                failures.append(f"kappa={kappa}, b={b}: {exc}")
                worst = max(worst, getattr(exc, "worst", np.inf))
    return CheckResult("field_bounds_monotone", not failures, worst, "; ".join(failures))


def check_piecewise_order(grid: RadialGrid, kappa: float, b: float) -> CheckResult:
    g = gaussian_reference(0.5 * b, grid).g
    reference = solve_picard(g, kappa, b)
    errors = [solve_piecewise_bessel(g, delta, kappa, b).sup_distance(reference) for delta in STEP_DELTAS]
    order = float(np.polyfit(np.log(STEP_DELTAS), np.log(errors), 1)[0])
    return CheckResult("piecewise_bessel_order", 0.8 <= order <= 1.5, order, f"errors {errors}")


def check_large_field_sector(grid: RadialGrid) -> CheckResult:
    k = sector_check(AlphaProfile.homogeneous(grid, 40.0), k_range=(-30, 0))
    return CheckResult("sector_large_field", k < 0, float(k), f"k = {k} at b = 40")


def check_self_consistent(grid: RadialGrid, kappa: float, b: float, tol: float, b_point: float) -> List[CheckResult]:
    sol = iterate(kappa, b, confined_grid(grid, b), tol=tol)
    if not sol.converged:
        return [CheckResult("self_consistent_converged", False, sol.field_residual, sol.failure or "max_iter")]
    res_field, res_eigen = residuals(sol)
    out = [CheckResult("self_consistent_residuals", max(res_field, res_eigen) < 1e-7,
                       max(res_field, res_eigen), f"{sol.iterations} iterations")]

    k = sector_check(sol.alpha)
    out.append(CheckResult("sector_zero", k == 0, float(k)))

    report = comparison_check(sol.ground.g, gaussian_reference(0.5 * b, sol.field.grid).g)
    out.append(CheckResult("comparison", report.passed, report.ratio_drop,
                           f"min sqrt g = {report.floor:.6f} vs {report.floor_bound:.6f}"))

    cert = decay_certificate(sol.field, sol.ground.g, b_point, kappa)
    ok = cert.chain_holds or not cert.asymptotic_ok
    out.append(CheckResult("decay_certificate", ok, cert.field_value,
                           f"B={cert.field_value:.4e} <= {cert.integral_bound:.4e} <= {cert.linear_bound:.4e}"))
    try:
        check_field_invariants(sol.field)
        out.append(CheckResult("self_consistent_field_bounds", True, 0.0))
    except MeissnerError as exc:
        out.append(CheckResult("self_consistent_field_bounds", False, getattr(exc, "worst", np.inf), str(exc)))
    return out


def check_physical(params: PhysicalParams) -> List[CheckResult]:
    delta, _ = penetration_depth(params)
    fields = critical_fields(params, 1.0)
    phases = [phase_classify(h, fields.H0, fields.HcR).phase
              for h in (fields.H0, 0.5 * (fields.H0 + fields.Hc0), fields.Hc0)]
    return [
        CheckResult("penetration_depth", 5e-8 <= delta <= 5e-7, delta, f"delta = {delta:.6e} m"),
        CheckResult("phase_partition", phases == ["expelled", "surface_decay", "penetrating"],
                    0.0, ", ".join(phases)),
    ]


def _guarded(name: str, check: Callable[[], object]) -> List[CheckResult]:
    try:
        result = check()
    except MeissnerError as exc:
        LOG.error(f"❌ check {name} raised: {exc}")
        return [CheckResult(name, False, float("inf"), str(exc))]
    return result if isinstance(result, list) else [result]


def run_suite(grid: RadialGrid, kappa: float = VERIFY_KAPPA, boundary_b: float = 0.9, tol: float = 1e-8,
              b_point: float = 0.5, params: Optional[PhysicalParams] = None) -> VerificationReport:
    """Run every check and collect the results"""
    params = params or PhysicalParams()
    checks: List[CheckResult] = []
    suite = [
        ("bessel_oracle", check_bessel_oracle),
        ("ratio_threshold", check_ratio_threshold),
        ("picard_bessel_oracle", check_picard_oracle),
        ("gaussian_eigen_oracle", lambda: check_gaussian_eigen(grid)),
        ("field_bounds_monotone", lambda: check_field_bounds(grid)),
        ("piecewise_bessel_order", lambda: check_piecewise_order(grid, kappa, boundary_b)),
        ("sector_large_field", lambda: check_large_field_sector(grid)),
        ("self_consistent", lambda: check_self_consistent(grid, kappa, boundary_b, tol, b_point)),
        ("physical", lambda: check_physical(params)),
    ]
    for name, check in suite:
        LOG.info(f"🔎 running {name}")
        checks.extend(_guarded(name, check))
    report = VerificationReport(checks)
    for check in report.checks:
        if not check.passed:
            LOG.warning(f"⚠️ {check.name} failed: {check.detail or check.worst}")
    return report
