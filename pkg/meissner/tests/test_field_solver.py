import numpy as np
import pytest

from meissner.eigensolver import gaussian_reference
from meissner.exceptions import ConvergenceError, DomainError, InvariantViolationError, StructuralError
from meissner.field_solver import (
    analytic_constant_g,
    apply_contraction,
    check_field_invariants,
    contraction_window,
    decay_certificate,
    field_residual,
    solve_picard,
    solve_piecewise_bessel,
    vector_potential,
)
from meissner.profiles import DensityProfile, FieldProfile, RadialGrid
from meissner.special_functions import bessel_i0


def test_contraction_of_constant_field(cylinder_grid):
    b = 0.8
    image = apply_contraction(FieldProfile.constant(cylinder_grid, b), DensityProfile.uniform(cylinder_grid, 1.0), 1.0)
    rho = cylinder_grid.inside
    np.testing.assert_allclose(image.inside, b - 0.25 * b * (1.0 - rho**2), atol=1e-13)
    assert image.b[0] == pytest.approx(0.75 * b, abs=1e-13)
    assert image.provenance == "picard"


@pytest.mark.parametrize("kappa", [1.0, 5.0, 10.0])
def test_picard_matches_bessel_solution(cylinder_grid, kappa):
    g = DensityProfile.uniform(cylinder_grid, 1.0)
    field = solve_picard(g, kappa, 1.0)
    exact = analytic_constant_g(1.0, kappa, 1.0, cylinder_grid)
    assert field.sup_distance(exact) < 1e-5
    assert field.b[0] == pytest.approx(1.0 / bessel_i0(kappa), rel=1e-4)


def test_analytic_solution_has_exact_ends(cylinder_grid):
    field = analytic_constant_g(0.5, 4.0, 0.3, cylinder_grid)
    assert field.b[cylinder_grid.boundary_index] == 0.3
    assert field.b[0] == pytest.approx(0.3 / bessel_i0(4.0 * np.sqrt(0.5)), rel=1e-12)


def test_analytic_solution_survives_huge_kappa():
    grid = RadialGrid.create(2001, 1.0)
    field = analytic_constant_g(1.0, 2000.0, 0.5, grid)
    assert np.all(np.isfinite(field.b))
    assert field.b[0] == 0.0 or field.b[0] < 1e-300
    check_field_invariants(field)


def test_plain_trapezoid_refines_at_second_order():
    distances = []
    for n in (201, 401):
        grid = RadialGrid.create(n, 1.0)
        field = solve_picard(DensityProfile.uniform(grid, 1.0), 5.0, 1.0, tol=1e-12, corrected=False)
        distances.append(field.sup_distance(analytic_constant_g(1.0, 5.0, 1.0, grid)))
    assert distances[1] < distances[0] / 3.0


def test_kappa_zero_leaves_field_flat(cylinder_grid):
    field = solve_picard(DensityProfile.uniform(cylinder_grid, 1.0), 0.0, 0.7)
    np.testing.assert_allclose(field.inside, 0.7)


def test_zero_density_leaves_field_flat(cylinder_grid):
    field = solve_picard(DensityProfile.uniform(cylinder_grid, 0.0), 30.0, 0.7)
    np.testing.assert_allclose(field.inside, 0.7)


def test_gaussian_density_field_respects_bounds(coarse_grid):
    g = gaussian_reference(0.45, coarse_grid).g
    for kappa in (0.5, 2.0, 20.0):
        field = solve_picard(g, kappa, 0.9)
        check_field_invariants(field)
        assert field_residual(field, g, kappa) < 1e-9


def test_contraction_scheme_agrees_with_axis_scheme(cylinder_grid):
    g = DensityProfile.uniform(cylinder_grid, 1.0)
    axis = solve_picard(g, 1.0, 0.5)
    contraction = solve_picard(g, 1.0, 0.5, scheme="contraction")
    assert axis.sup_distance(contraction) < 1e-9


def test_contraction_scheme_diverges_for_strong_screening(cylinder_grid):
    with pytest.raises(ConvergenceError):
        solve_picard(DensityProfile.uniform(cylinder_grid, 1.0), 20.0, 0.5, scheme="contraction")


def test_iteration_cap(cylinder_grid):
    with pytest.raises(ConvergenceError) as info:
        solve_picard(DensityProfile.uniform(cylinder_grid, 1.0), 10.0, 1.0, max_iter=1)
    assert info.value.iterations == 1


@pytest.mark.parametrize("kwargs", [{"kappa": -1.0}, {"boundary_b": 0.0}, {"relaxation": 0.0}, {"scheme": "newton"}])
def test_picard_rejects_bad_arguments(cylinder_grid, kwargs):
    args = {"kappa": 2.0, "boundary_b": 0.5, **kwargs}
    with pytest.raises(DomainError):
        solve_picard(DensityProfile.uniform(cylinder_grid, 1.0), **args)


def test_grids_must_match(cylinder_grid):
    other = RadialGrid.create(501, 1.0)
    with pytest.raises(StructuralError):
        apply_contraction(FieldProfile.constant(other, 1.0), DensityProfile.uniform(cylinder_grid, 1.0), 1.0)


def test_contraction_window():
    grid = RadialGrid.create(101, 1.0)
    assert contraction_window(DensityProfile.uniform(grid, 4.0), 1.0) == pytest.approx(0.25)
    assert contraction_window(DensityProfile.uniform(grid, 1.0), 0.2) == 1.0
    assert contraction_window(DensityProfile.uniform(grid, 1.0), 0.0) == 1.0


def test_invariant_checks(cylinder_grid):
    rho = cylinder_grid.inside
    dip = FieldProfile.from_inside(cylinder_grid, rho - 0.1, 0.9, "initial")
    with pytest.raises(InvariantViolationError) as info:
        check_field_invariants(dip)
    assert info.value.name == "field_nonnegative"

    wavy = FieldProfile.from_inside(cylinder_grid, 0.5 + 0.1 * np.sin(8 * rho), 0.9, "initial")
    with pytest.raises(InvariantViolationError) as info:
        check_field_invariants(wavy)
    assert info.value.name == "field_monotone"

    bump = FieldProfile.from_inside(cylinder_grid, np.where(rho < 0.5, 0.1, 1.2), 0.9, "initial")
    with pytest.raises(InvariantViolationError) as info:
        check_field_invariants(bump)
    assert info.value.name == "field_bounded"


def test_piecewise_with_constant_density_is_exact(cylinder_grid):
    g = DensityProfile.uniform(cylinder_grid, 1.0)
    piecewise = solve_piecewise_bessel(g, 0.1, 5.0, 0.8)
    assert piecewise.sup_distance(analytic_constant_g(1.0, 5.0, 0.8, cylinder_grid)) < 1e-11
    assert piecewise.provenance == "bessel_piecewise"


def test_piecewise_approaches_picard_as_slabs_shrink():
    grid = RadialGrid.with_spacing(1000, 6.0)
    b = 0.9
    g = gaussian_reference(0.5 * b, grid).g
    reference = solve_picard(g, 10.0, b)
    deltas = (0.1, 0.05, 0.025)
    errors = [solve_piecewise_bessel(g, d, 10.0, b).sup_distance(reference) for d in deltas]
    assert errors[0] > errors[1] > errors[2]
    order = np.polyfit(np.log(deltas), np.log(errors), 1)[0]
    assert 0.8 <= order <= 1.5
    assert solve_piecewise_bessel(g, 0.01, 10.0, b).sup_distance(reference) < 0.05 * b


def test_piecewise_handles_uneven_last_slab(cylinder_grid):
    g = DensityProfile.from_function(cylinder_grid, lambda r: 1.0 + 0.5 * r * r)
    field = solve_piecewise_bessel(g, 0.3, 3.0, 0.6)
    assert field.b[cylinder_grid.boundary_index] == pytest.approx(0.6)
    check_field_invariants(field)


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.1])
def test_piecewise_rejects_bad_steps(cylinder_grid, delta):
    with pytest.raises(DomainError):
        solve_piecewise_bessel(DensityProfile.uniform(cylinder_grid, 1.0), delta, 1.0, 0.5)


def test_vector_potential_of_uniform_field():
    grid = RadialGrid.with_spacing(100, 4.0)
    a = vector_potential(FieldProfile.constant(grid, 0.6))
    np.testing.assert_allclose(a, 0.3 * grid.nodes, atol=1e-13)
    assert a[0] == 0.0


def test_vector_potential_outside_carries_total_flux():
    grid = RadialGrid.with_spacing(1000, 3.0)
    field = analytic_constant_g(1.0, 5.0, 0.9, grid)
    a = vector_potential(field)
    rho = grid.nodes
    flux_inside = a[grid.boundary_index]
    outside = slice(grid.boundary_index + 1, None)
    np.testing.assert_allclose(a[outside] * rho[outside], flux_inside + 0.45 * (rho[outside] ** 2 - 1.0), rtol=1e-12)


def test_decay_certificate_chain_at_strong_screening(cylinder_grid):
    g = DensityProfile.uniform(cylinder_grid, 1.0)
    field = analytic_constant_g(1.0, 10.0, 1.0, cylinder_grid)
    cert = decay_certificate(field, g, 0.5, 10.0)
    assert cert.asymptotic_ok
    assert cert.chain_holds
    assert cert.field_value == pytest.approx(bessel_i0(5.0) / bessel_i0(10.0), rel=1e-9)
    assert cert.integral_bound == pytest.approx(np.exp(-2.5), rel=1e-9)
    assert cert.linear_bound == pytest.approx(np.exp(-0.4389 * 5.0), rel=1e-12)
    assert 1.1 < cert.threshold < 1.2
    assert set(cert.as_dict()) >= {"b_point", "chain_holds", "asymptotic_ok"}


def test_decay_certificate_at_surface(cylinder_grid):
    g = DensityProfile.uniform(cylinder_grid, 1.0)
    field = analytic_constant_g(1.0, 10.0, 0.4, cylinder_grid)
    cert = decay_certificate(field, g, 1.0, 10.0)
    assert cert.field_value == cert.integral_bound == cert.linear_bound == 0.4
    assert cert.chain_holds


def test_decay_certificate_is_informational_near_axis(cylinder_grid):
    g = DensityProfile.uniform(cylinder_grid, 1.0)
    field = analytic_constant_g(1.0, 1.0, 1.0, cylinder_grid)
    assert not decay_certificate(field, g, 0.5, 1.0).asymptotic_ok


@pytest.mark.parametrize("b_point", [0.0, 1.5])
def test_decay_certificate_rejects_point_outside_sample(cylinder_grid, b_point):
    g = DensityProfile.uniform(cylinder_grid, 1.0)
    with pytest.raises(DomainError):
        decay_certificate(FieldProfile.constant(cylinder_grid, 1.0), g, b_point, 1.0)


def _slab_frozen(g, delta):
    rho = g.grid.inside
    last = int(np.ceil(1.0 / delta - 1e-9)) - 1
    slab = np.minimum(np.floor((1.0 - rho) / delta + 1e-9), last)
    frozen = g.g.copy()
    frozen[: g.grid.boundary_index + 1] = np.interp(1.0 - delta * slab, rho, g.inside)
    return DensityProfile(g.grid, frozen)


@pytest.mark.parametrize("delta", [0.1, 0.3])
def test_piecewise_is_the_fixed_point_for_slab_density(delta):
    grid = RadialGrid.create(4001, 1.0)
    g = DensityProfile.from_function(grid, lambda r: 1.2 * np.exp(-0.45 * r * r))
    piecewise = solve_piecewise_bessel(g, delta, 10.0, 0.9)
    frozen = _slab_frozen(g, delta)
    reference = solve_picard(frozen, 10.0, 0.9)
    assert piecewise.sup_distance(reference) < 2e-4
    assert field_residual(piecewise, frozen, 10.0) < 2e-4


def test_piecewise_without_screening_is_flat(cylinder_grid):
    field = solve_piecewise_bessel(DensityProfile.uniform(cylinder_grid, 1.0), 0.2, 0.0, 0.4)
    np.testing.assert_allclose(field.inside, 0.4)


def test_piecewise_survives_strong_screening(cylinder_grid):
    g = DensityProfile.from_function(cylinder_grid, lambda r: 1.0 + 0.5 * r * r)
    field = solve_piecewise_bessel(g, 0.05, 2000.0, 0.5)
    assert np.all(np.isfinite(field.b))
    check_field_invariants(field)


@pytest.mark.parametrize("kappa", [1.0, 5.0, 10.0])
def test_contraction_on_random_profiles(cylinder_grid, rng, kappa):
    g = DensityProfile(cylinder_grid, rng.uniform(0.5, 1.5, size=cylinder_grid.n))
    width = contraction_window(g, kappa)
    window = cylinder_grid.inside >= 1.0 - width
    fixed = rng.uniform(0.0, 0.9, size=cylinder_grid.n)
    for _ in range(5):
        first, second = fixed.copy(), fixed.copy()
        first[: cylinder_grid.boundary_index + 1][window] = rng.uniform(0.0, 0.9, size=window.sum())
        second[: cylinder_grid.boundary_index + 1][window] = rng.uniform(0.0, 0.9, size=window.sum())
        h1 = FieldProfile(cylinder_grid, first, 0.9, "initial")
        h2 = FieldProfile(cylinder_grid, second, 0.9, "initial")
        images = apply_contraction(h1, g, kappa).sup_distance(apply_contraction(h2, g, kappa))
        assert images <= 0.25 * h1.sup_distance(h2)


def test_curl_of_vector_potential_recovers_field():
    grid = RadialGrid.with_spacing(1000, 3.0)
    g = gaussian_reference(0.45, grid).g
    field = solve_picard(g, 5.0, 0.9)
    rho = grid.nodes
    m = grid.boundary_index
    curl = np.gradient(rho * vector_potential(field), grid.spacing, edge_order=2)
    curl[1:] /= rho[1:]
    np.testing.assert_allclose(curl[1:m], field.b[1:m], atol=1e-4)
    np.testing.assert_allclose(curl[m + 1:], 0.9, atol=1e-9)
