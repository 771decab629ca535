#!/usr/bin/env python3
"""
Batch front-end for the Meissner solvers.

Usage:
    meissner --mode verify
    meissner --mode self-consistent --kappa 10 --boundary-b 0.9 --output run.csv
    meissner --config sweep.env --format json --output sweep.json
"""

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .config import RunConfig, load_config
from .eigensolver import comparison_check, eigen_residual, gaussian_reference, ground_state, sector_check
from .exceptions import ConfigError, ConvergenceError, DiscretizationError, InvariantViolationError, MeissnerError
from .field_solver import (
    analytic_constant_g,
    contraction_window,
    decay_certificate,
    field_residual,
    solve_picard,
    solve_piecewise_bessel,
    vector_potential,
)
from .logging_setup import setup_logging
from .meissner_analysis import (
    critical_fields,
    current_profile,
    energy_sweep,
    magnetization_profile,
    magnetization_tau,
    penetration_depth,
    phase_classify,
    slope_curve,
    slope_increasing,
    surface_current,
    thermodynamic_induction,
)
from .output import RunResult, read_density_csv, write_result
from .profiles import AlphaProfile, DensityProfile, FieldProfile, RadialGrid
from .self_consistent import confined_grid, convergence_region, iterate
from .verification import run_suite

LOG = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2
EXIT_INVARIANT = 3


def _base_grid(config: RunConfig) -> RadialGrid:
    return RadialGrid.create(config.grid_n, config.rho_max)


def _working_grid(config: RunConfig) -> RadialGrid:
    grid = _base_grid(config)
    if config.extend_grid:
        grid = confined_grid(grid, config.boundary_b, config.tail_decay)
        if grid.rho_max > config.rho_max:
            LOG.info(f"📏 grid extended to rho_max = {grid.rho_max:.4f} to confine the ground state")
    return grid


def _input_density(config: RunConfig, grid: RadialGrid) -> DensityProfile:
    if config.density_path:
        table = read_density_csv(config.density_path)
        rho = table["rho"].to_numpy(float)
        order = np.argsort(rho)
        return DensityProfile(grid, np.interp(grid.nodes, rho[order], table["g"].to_numpy(float)[order]))
    if config.boundary_b < 1.0 and config.field_method != "analytic":
        return gaussian_reference(0.5 * config.boundary_b, grid).g
    return DensityProfile.uniform(grid, 1.0)


def _certificate_scalars(field: FieldProfile, g: DensityProfile, config: RunConfig) -> Dict[str, Any]:
    cert = decay_certificate(field, g, config.b_point, config.kappa)
    return {f"certificate_{key}": value for key, value in cert.as_dict().items()}


def _certificate_failed(scalars: Dict[str, Any]) -> bool:
    return bool(scalars["certificate_asymptotic_ok"]) and not scalars["certificate_chain_holds"]


def run_solve_field(config: RunConfig) -> Tuple[int, RunResult]:
    grid = _base_grid(config)
    g = _input_density(config, grid)
    b = config.boundary_b
    if config.field_method == "analytic":
        inside = g.inside
        if np.ptp(inside) > 1e-12 * max(1.0, abs(inside).max()):
            raise ConfigError("field_method=analytic needs a constant density", key="field_method")
        field = analytic_constant_g(float(inside[0]), config.kappa, b, grid)
    elif config.field_method == "bessel-piecewise":
        field = solve_piecewise_bessel(g, config.step_delta, config.kappa, b)
    else:
        field = solve_picard(g, config.kappa, b, tol=config.tol, max_iter=config.max_iter,
                             scheme=config.picard_scheme, relaxation=config.relaxation)

    scalars = {
        "kappa": config.kappa,
        "boundary_b": b,
        "provenance": field.provenance,
        "field_residual": field_residual(field, g, config.kappa),
        "contraction_window": contraction_window(g, config.kappa),
        **_certificate_scalars(field, g, config),
    }
    result = RunResult(columns={"rho": grid.nodes, "B": field.b, "a": vector_potential(field)}, scalars=scalars)
    return (EXIT_INVARIANT if _certificate_failed(scalars) else EXIT_OK), result


def run_eigensolve(config: RunConfig) -> Tuple[int, RunResult]:
    grid = _working_grid(config)
    b = config.boundary_b
    if config.kappa is not None and b < 1.0:
        field = solve_picard(gaussian_reference(0.5 * b, grid).g, config.kappa, b, tol=config.tol)
        alpha = AlphaProfile.from_vector_potential(grid, vector_potential(field))
    else:
        alpha = AlphaProfile.homogeneous(grid, b)
    gs = ground_state(alpha, grid)
    scalars = {
        "energy": gs.energy,
        "sector_k": sector_check(alpha),
        "emergent_sigma": gs.emergent_sigma,
        "tail_mass": gs.tail_mass,
        "eigen_residual": eigen_residual(alpha, gs),
        "homogeneous_energy": b,
    }
    result = RunResult(columns={"rho": grid.nodes, "phi": gs.phi, "g": gs.g.g}, scalars=scalars)
    return EXIT_OK, result


def run_self_consistent(config: RunConfig) -> Tuple[int, RunResult]:
    if not 0.0 < config.boundary_b < 1.0:
        raise ConfigError("mode=self-consistent needs boundary_b in (0, 1)", key="boundary_b")
    grid = _working_grid(config)
    sol = iterate(config.kappa, config.boundary_b, grid, tol=config.tol, max_iter=config.max_iter,
                  mixing=config.mixing, scheme=config.picard_scheme, relaxation=config.relaxation)
    scalars: Dict[str, Any] = {
        "kappa": config.kappa,
        "boundary_b": config.boundary_b,
        "converged": sol.converged,
        "iterations": sol.iterations,
        "energy": sol.energy,
        "field_residual": sol.field_residual,
        "eigen_residual": sol.eigen_residual,
        "regime_violation": sol.regime_violation,
    }
    if sol.field is None:
        return EXIT_NOT_CONVERGED, RunResult(scalars=scalars, history=sol.history)

    report = comparison_check(sol.ground.g, gaussian_reference(0.5 * config.boundary_b, grid).g)
    scalars.update({
        "surface_current": surface_current(sol),
        "emergent_sigma": sol.ground.emergent_sigma,
        "tail_mass": sol.ground.tail_mass,
        **{f"comparison_{key}": value for key, value in report.summary().items()},
        **_certificate_scalars(sol.field, sol.ground.g, config),
    })
    columns = {
        "rho": grid.nodes,
        "B": sol.field.b,
        "a": sol.alpha.alpha,
        "g": sol.ground.g.g,
        "j_theta": current_profile(sol),
        "M": magnetization_profile(sol),
    }
    result = RunResult(columns=columns, scalars=scalars, history=sol.history)
    if sol.regime_violation or (sol.converged and (not report.passed or _certificate_failed(scalars))):
        return EXIT_INVARIANT, result
    return (EXIT_OK if sol.converged else EXIT_NOT_CONVERGED), result


def run_sweep(config: RunConfig) -> Tuple[int, RunResult]:
    curve = energy_sweep(config.kappa, config.b_values, _base_grid(config), tol=config.tol,
                         max_iter=config.max_iter, mixing=config.mixing, workers=config.workers,
                         extend=config.extend_grid, tail_decay=config.tail_decay)
    slopes = slope_curve(curve)
    scalars: Dict[str, Any] = {"kappa": config.kappa, "gaps": int((~curve["converged"]).sum())}
    energies = curve["energy"].dropna().to_numpy()
    scalars["monotone"] = bool(np.all(np.diff(energies) >= 0.0))
    scalars["slope_increasing"] = slope_increasing(slopes) if len(slopes) > 1 else None
    scalars["tau"] = magnetization_tau(curve) if len(energies) >= 3 else None
    result = RunResult(columns={c: curve[c].to_numpy() for c in curve.columns}, scalars=scalars,
                       tables={"tau_curve": slopes})
    return (EXIT_NOT_CONVERGED if scalars["gaps"] else EXIT_OK), result


def run_verify(config: RunConfig) -> Tuple[int, RunResult]:
    if not 0.0 < config.boundary_b < 1.0:
        raise ConfigError("mode=verify needs boundary_b in (0, 1)", key="boundary_b")
    kappa = config.kappa if config.kappa is not None else 10.0
    report = run_suite(_base_grid(config), kappa=kappa, boundary_b=config.boundary_b, tol=config.tol,
                       b_point=config.b_point, params=config.physical_params)
    frame = report.frame()
    result = RunResult(columns={c: frame[c].to_numpy() for c in frame.columns},
                       scalars={"passed": report.passed, "checks": len(report.checks)})
    return (EXIT_OK if report.passed else EXIT_INVARIANT), result


def run_phase(config: RunConfig) -> Tuple[int, RunResult]:
    params = config.physical_params
    tau = config.tau
    if tau is None:
        curve = energy_sweep(config.kappa, config.b_values, _base_grid(config), tol=config.tol,
                             max_iter=config.max_iter, mixing=config.mixing, workers=config.workers,
                             extend=config.extend_grid, tail_decay=config.tail_decay)
        tau = magnetization_tau(curve)
    fields = critical_fields(params, tau)
    report = phase_classify(config.applied_h, fields.H0, fields.HcR)
    delta, kappa_physical = penetration_depth(params)
    tesla = fields.in_tesla(params.vacuum_mu0)
    columns = {
        "quantity": ["H0", "HcR", "Hc0"],
        "value_A_per_m": [fields.H0, fields.HcR, fields.Hc0],
        "value_T": [tesla["mu0_H0"], tesla["mu0_HcR"], tesla["mu0_Hc0"]],
    }
    scalars = {
        **report.as_dict(),
        "tau": tau,
        "thermodynamic_B": thermodynamic_induction(config.applied_h, fields.H0),
        "penetration_depth_m": delta,
        "kappa_physical": kappa_physical,
    }
    return EXIT_OK, RunResult(columns=columns, scalars=scalars)


def run_region(config: RunConfig) -> Tuple[int, RunResult]:
    table = convergence_region(config.kappa_values, config.b_values, _base_grid(config), tol=config.tol,
                               max_iter=config.max_iter, mixing=config.mixing, workers=config.workers,
                               extend=config.extend_grid, tail_decay=config.tail_decay)
    return EXIT_OK, RunResult(columns={c: table[c].to_numpy() for c in table.columns},
                              scalars={"converged_points": int(table["converged"].sum())})


MODES: Dict[str, Callable[[RunConfig], Tuple[int, RunResult]]] = {
    "solve-field": run_solve_field,
    "eigensolve": run_eigensolve,
    "self-consistent": run_self_consistent,
    "sweep": run_sweep,
    "verify": run_verify,
    "phase": run_phase,
    "region": run_region,
}


def execute(config: RunConfig) -> Tuple[int, Optional[RunResult]]:
    """Run one mode and map failures onto exit codes; nothing is written"""
    LOG.info(f"⚙️ run configuration: {config.model_dump_json()}")
    try:
        code, result = MODES[config.mode](config)
    except ConfigError as exc:
        LOG.error(f"❌ configuration error ({exc.key}): {exc}")
        return EXIT_CONFIG, None
    except ConvergenceError as exc:
        LOG.error(f"❌ solver did not converge: {exc}")
        return EXIT_NOT_CONVERGED, None
    except (InvariantViolationError, DiscretizationError) as exc:
        LOG.error(f"❌ invariant violated: {exc}")
        return EXIT_INVARIANT, None
    except MeissnerError as exc:
        LOG.error(f"❌ {type(exc).__name__}: {exc}")
        return EXIT_CONFIG, None
    if code == EXIT_OK:
        LOG.info(f"✅ mode {config.mode} finished")
    else:
        LOG.warning(f"⚠️ mode {config.mode} finished with exit code {code}")
    return code, result


def run(config: RunConfig) -> int:
    """Execute the configured mode and write its artifacts; returns the exit code"""
    code, result = execute(config)
    if result is None:
        return code
    try:
        write_result(result, config.model_dump(), config.output_path, config.output_format)
    except OSError as exc:
        LOG.error(f"❌ cannot write output {config.output_path}: {exc}")
        return EXIT_CONFIG
    return code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message, key="argv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(description="Semiclassical Meissner-effect solver for a charged Bose gas in a cylinder")
    parser.add_argument("--config", help="flat key=value or JSON config file")
    parser.add_argument("--mode", choices=sorted(MODES), help="what to run")
    parser.add_argument("--kappa", type=float, help="R / penetration depth")
    parser.add_argument("--boundary-b", dest="boundary_b", type=float, help="surface field in units of hbar/(e R^2)")
    parser.add_argument("--grid-n", dest="grid_n", type=int, help="number of radial nodes")
    parser.add_argument("--rho-max", dest="rho_max", type=float, help="grid radius in units of R")
    parser.add_argument("--tol", type=float, help="convergence tolerance")
    parser.add_argument("--max-iter", dest="max_iter", type=int, help="iteration cap")
    parser.add_argument("--mixing", type=float, help="density mixing weight")
    parser.add_argument("--step-delta", dest="step_delta", type=float, help="slab width for bessel-piecewise")
    parser.add_argument("--field-method", dest="field_method", choices=["picard", "bessel-piecewise", "analytic"])
    parser.add_argument("--density", dest="density_path", help="CSV with columns rho,g for solve-field")
    parser.add_argument("--b-values", dest="b_values", help="comma-separated sweep fields")
    parser.add_argument("--kappa-values", dest="kappa_values", help="comma-separated kappas for region")
    parser.add_argument("--tau", type=float, help="dimensionless magnetization slope for phase")
    parser.add_argument("--applied-h", dest="applied_h", type=float, help="applied field in A/m for phase")
    parser.add_argument("--workers", type=int, help="worker processes for sweeps")
    parser.add_argument("--output", dest="output_path", help="output file (stdout when omitted)")
    parser.add_argument("--format", dest="output_format", choices=["csv", "json"])
    parser.add_argument("--log-level", dest="log_level")
    parser.add_argument("--log-dir", dest="log_dir", help="also write a timestamped run log here")
    return parser


def main_cli(argv: Optional[List[str]] = None) -> int:
    """Parse flags, load the configuration and run it"""
    try:
        args = build_parser().parse_args(argv)
        overrides = {key: value for key, value in vars(args).items() if key != "config"}
        setup_logging(args.log_level)
        config = load_config(args.config, overrides)
    except ConfigError as exc:
        logging.getLogger("meissner").error(f"❌ configuration error ({exc.key}): {exc}")
        return EXIT_CONFIG
    setup_logging(config.log_level, config.log_dir)
    return run(config)


if __name__ == "__main__":
    sys.exit(main_cli())
