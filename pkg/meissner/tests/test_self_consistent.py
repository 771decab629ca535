import numpy as np
import pytest

from meissner import self_consistent
from meissner.eigensolver import comparison_check, gaussian_reference, sector_check
from meissner.exceptions import ConvergenceError, DiscretizationError, DomainError, InvariantViolationError
from meissner.field_solver import analytic_constant_g, check_field_invariants, field_residual
from meissner.profiles import FieldProfile, RadialGrid
from meissner.self_consistent import (
    SelfConsistentSolution,
    confined_grid,
    convergence_region,
    initial_data_sensitivity,
    iterate,
    residuals,
)


def test_confined_grid_keeps_spacing(coarse_grid):
    grid = confined_grid(coarse_grid, 0.1)
    assert grid.boundary_index == coarse_grid.boundary_index
    assert grid.rho_max >= 20.0
    assert confined_grid(coarse_grid, 0.9, tail_decay=1.0) is coarse_grid


def test_london_state_converges(london_state):
    assert london_state.converged
    assert london_state.regime_violation is False
    assert london_state.sector_k == 0
    assert london_state.failure is None
    assert london_state.field_residual < 1e-8
    assert london_state.eigen_residual < 1e-8
    assert len(london_state.history) == london_state.iterations


def test_london_state_recomputed_residuals(london_state):
    res_field, res_eigen = residuals(london_state)
    assert res_field < 1e-7
    assert res_eigen < 1e-7


def test_london_state_physics(london_state):
    field = london_state.field
    check_field_invariants(field)
    assert field.b[0] < 0.1 * london_state.boundary_b
    assert 0.0 < london_state.energy <= london_state.boundary_b
    assert sector_check(london_state.alpha) == 0
    report = comparison_check(london_state.ground.g, gaussian_reference(0.45, field.grid).g)
    assert report.passed


def test_perturbed_field_is_not_a_fixed_point(london_state):
    field = london_state.field
    rho = field.grid.inside
    bumped = FieldProfile.from_inside(field.grid, field.inside + 0.01 * np.sin(np.pi * rho), 0.9, "initial")
    assert field_residual(bumped, london_state.ground.g, 5.0) > 1e-3


def test_no_screening_converges_at_once(coarse_grid):
    sol = iterate(0.0, 0.5, confined_grid(coarse_grid, 0.5))
    assert sol.converged
    assert sol.iterations == 1
    np.testing.assert_allclose(sol.field.inside, 0.5)
    assert sol.energy == pytest.approx(0.5, abs=1e-4)


def test_weak_field_matches_constant_density_solution(coarse_grid):
    grid = confined_grid(coarse_grid, 0.01)
    sol = iterate(2.0, 0.01, grid)
    assert sol.converged
    exact = analytic_constant_g(1.0, 2.0, 0.01, grid)
    assert sol.field.sup_distance(exact) < 0.02 * 0.01


def test_start_does_not_matter(coarse_grid):
    grid = confined_grid(coarse_grid, 0.5)
    assert initial_data_sensitivity(5.0, 0.5, grid) < 1e-6


def test_iteration_cap_is_a_result(coarse_grid):
    sol = iterate(5.0, 0.5, confined_grid(coarse_grid, 0.5), max_iter=1)
    assert not sol.converged
    assert sol.iterations == 1
    assert len(sol.history) == 1
    assert sol.failure is None


def test_regime_violation_stops_the_loop(coarse_grid, monkeypatch):
    monkeypatch.setattr(self_consistent, "sector_check", lambda alpha: -1)
    sol = iterate(5.0, 0.5, confined_grid(coarse_grid, 0.5))
    assert sol.regime_violation
    assert sol.sector_k == -1
    assert not sol.converged
    assert sol.field is None
    assert np.isnan(sol.energy)
    assert residuals(sol) == (float("inf"), float("inf"))


def test_field_failure_is_reported(coarse_grid, monkeypatch):
    def failing(*args, **kwargs):
        raise ConvergenceError("stuck", 1.0, 7)

    monkeypatch.setattr(self_consistent, "solve_picard", failing)
    sol = iterate(5.0, 0.5, confined_grid(coarse_grid, 0.5))
    assert not sol.converged
    assert "stuck" in sol.failure
    assert initial_data_sensitivity(5.0, 0.5, confined_grid(coarse_grid, 0.5)) == float("inf")


@pytest.mark.parametrize("kappa, b, mixing", [(-1.0, 0.5, 0.5), (5.0, 1.0, 0.5), (5.0, 0.0, 0.5), (5.0, 0.5, 0.0)])
def test_rejects_bad_arguments(coarse_grid, kappa, b, mixing):
    with pytest.raises(DomainError):
        iterate(kappa, b, coarse_grid, mixing=mixing)


def test_convergence_region_table(coarse_grid):
    table = convergence_region([5.0, 0.0], [0.5], coarse_grid)
    assert list(table["kappa"]) == [0.0, 5.0]
    assert table["converged"].all()
    assert not table["regime_violation"].any()
    assert set(table.columns) == {
        "kappa", "boundary_b", "converged", "iterations", "field_residual",
        "eigen_residual", "regime_violation", "energy",
    }
    assert table.loc[1, "energy"] < table.loc[0, "energy"]


def test_solution_defaults():
    sol = SelfConsistentSolution(kappa=1.0, boundary_b=0.5, field=None, ground=None, iterations=0,
                                 field_residual=np.inf, eigen_residual=np.inf, converged=False)
    assert sol.history == []
    assert np.isnan(sol.energy)


@pytest.mark.slow
def test_default_grid_strong_screening():
    grid = confined_grid(RadialGrid.create(2001, 3.0), 0.9)
    sol = iterate(10.0, 0.9, grid, tol=1e-8)
    assert sol.converged
    assert max(residuals(sol)) < 1e-7
    assert sector_check(sol.alpha) == 0


def test_eigensolver_failure_is_reported(coarse_grid, monkeypatch):
    def failing(*args, **kwargs):
        raise ConvergenceError("inverse iteration did not converge", 1e-11, 500)

    monkeypatch.setattr(self_consistent, "ground_state", failing)
    sol = iterate(5.0, 0.5, confined_grid(coarse_grid, 0.5))
    assert not sol.converged
    assert not sol.regime_violation
    assert sol.failure.startswith("ConvergenceError")


def test_sector_failure_is_reported(coarse_grid, monkeypatch):
    def failing(alpha):
        raise DiscretizationError("negative ground energy in sector -1")

    monkeypatch.setattr(self_consistent, "sector_check", failing)
    sol = iterate(5.0, 0.5, confined_grid(coarse_grid, 0.5))
    assert not sol.converged
    assert "negative ground energy" in sol.failure


def test_field_invariant_failure_is_a_regime_violation(coarse_grid, monkeypatch):
    def failing(*args, **kwargs):
        raise InvariantViolationError("field_monotone", 1e-3, "B decreases towards the surface")

    monkeypatch.setattr(self_consistent, "solve_picard", failing)
    sol = iterate(5.0, 0.5, confined_grid(coarse_grid, 0.5))
    assert sol.regime_violation
    assert not sol.converged
    assert sol.field is None


def test_region_keeps_failed_points(coarse_grid, monkeypatch):
    def picky(alpha):
        # the unscreened gauge at b = 0.9 reaches 0.45 on the surface
        if alpha.alpha[alpha.grid.boundary_index] > 0.3:
            raise DiscretizationError("sector solve broke down")
        return 0

    monkeypatch.setattr(self_consistent, "sector_check", picky)
    table = convergence_region([0.0], [0.3, 0.9], coarse_grid)
    assert list(table["boundary_b"]) == [0.3, 0.9]
    assert list(table["converged"]) == [True, False]
    assert np.isnan(table.loc[1, "energy"])


def test_near_critical_field_keeps_comparison(coarse_grid):
    grid = confined_grid(coarse_grid, 0.999)
    sol = iterate(5.0, 0.999, grid)
    assert sol.converged
    report = comparison_check(sol.ground.g, gaussian_reference(0.4995, grid).g)
    assert report.ratio_ok
    assert report.floor_ok
    assert report.floor >= 0.8779 - 1e-4


def test_converged_sweep_points_stay_in_sector_zero(coarse_grid):
    for b in (0.1, 0.5, 0.9):
        sol = iterate(5.0, b, confined_grid(coarse_grid, b))
        assert sol.converged
        assert sector_check(sol.alpha) == 0
