import math

import numpy as np
import pytest

from fracfem.core.analysis import (
    ConvergenceTable,
    ErrorRecord,
    build_table,
    default_projection,
    h1_error,
    initial_vector,
    l1_step_count,
    l2_error,
    method_mass,
    observed_rate,
    recovered_gradient,
    recovered_gradient_error,
)
from fracfem.core.exact_solutions import FourierSeriesSolution, InitialData, ReferenceSolution
from fracfem.core.exceptions import DomainError, MeshMismatchError
from fracfem.core.fem import assemble_mass
from fracfem.core.models import CoefficientField, Mesh1D, NodalVector
from fracfem.core.usecases import run_experiment
from fracfem.harness.config import ExperimentConfig


class _Scaled:
    """An exact solution multiplied by a constant, data norm included."""

    def __init__(self, sol, factor: float):
        self.sol = sol
        self.factor = factor
        self.normalized = sol.normalized
        self.initial_norm = sol.initial_norm * factor
        self.min_cells = sol.min_cells

    def evaluate(self, x, t):
        return self.factor * np.asarray(self.sol.evaluate(x, t))

    def evaluate_deriv(self, x, t):
        return self.factor * np.asarray(self.sol.evaluate_deriv(x, t))


def test_observed_rate():
    assert observed_rate([4.0, 1.0, 0.25]) == pytest.approx([2.0, 2.0])
    assert observed_rate([1.0, 2.0 ** -1.5]) == pytest.approx([1.5])
    with pytest.raises(DomainError):
        observed_rate([1.0])
    with pytest.raises(DomainError):
        observed_rate([1.0, 0.0])


def test_error_of_a_finite_element_function_against_itself_is_zero(rng):
    mesh = Mesh1D(16)
    u_h = NodalVector(mesh, rng.normal(size=mesh.n_interior))
    ref = ReferenceSolution(mesh, u_h, 0.3)
    assert l2_error(mesh, u_h, ref, 0.3) <= 1e-14
    assert h1_error(mesh, u_h, ref, 0.3) <= 1e-12
    assert recovered_gradient_error(mesh, u_h, ref, 0.3, recovery="midpoint") <= 1e-12


def test_coarse_function_against_fine_reference():
    coarse, fine = Mesh1D(4), Mesh1D(8)
    ref = ReferenceSolution(fine, NodalVector(fine, [0, 0, 0, 1, 0, 0, 0]), 1.0)
    u_h = NodalVector.zeros(coarse)
    # hat of height 1 and half-width 1/8
    assert l2_error(coarse, u_h, ref, 1.0) == pytest.approx(math.sqrt(2.0 / 3.0 / 8.0), rel=1e-12)
    assert h1_error(coarse, u_h, ref, 1.0) == pytest.approx(4.0, rel=1e-12)


def test_quadrature_partition_must_nest():
    ref = ReferenceSolution(Mesh1D(12), NodalVector.zeros(Mesh1D(12)), 1.0)
    with pytest.raises(MeshMismatchError):
        l2_error(Mesh1D(8), NodalVector.zeros(Mesh1D(8)), ref, 1.0)
    with pytest.raises(MeshMismatchError):
        l2_error(Mesh1D(8), NodalVector.zeros(Mesh1D(4)), ref, 1.0)


def test_interpolation_error_of_the_quadratic():
    data = InitialData("quadratic_a")
    sol = FourierSeriesSolution(data, 0.5)
    for n_cells in (4, 8, 16):
        mesh = Mesh1D(n_cells)
        u_h = data.interpolant(mesh)
        # |v - I_h v| = 4 h^2 / sqrt(30) and |(v - I_h v)'| = 8 h / sqrt(12), over |v| = sqrt(8/15)
        assert l2_error(mesh, u_h, sol, 0.0) == pytest.approx(mesh.h**2, rel=1e-6)
        assert h1_error(mesh, u_h, sol, 0.0) == pytest.approx(math.sqrt(10.0) * mesh.h, rel=1e-4)


def test_errors_are_normalized_by_the_data(rng):
    data = InitialData("one_c1")
    sol = FourierSeriesSolution(data, 0.5)
    mesh = Mesh1D(8)
    u_h = NodalVector(mesh, rng.uniform(0.0, 0.1, size=mesh.n_interior))
    scaled = _Scaled(sol, 3.0)
    assert l2_error(mesh, 3.0 * u_h, scaled, 0.1) == pytest.approx(l2_error(mesh, u_h, sol, 0.1), rel=1e-12)
    assert h1_error(mesh, 3.0 * u_h, scaled, 0.1) == pytest.approx(h1_error(mesh, u_h, sol, 0.1), rel=1e-12)


def test_gauss_order_barely_matters():
    five = build_table("a", "lumped", 0.5, 1.0, [3, 4], gauss_points=5)
    ten = build_table("a", "lumped", 0.5, 1.0, [3, 4], gauss_points=10)
    for a, b in zip(five.rows, ten.rows):
        assert a.l2_error == pytest.approx(b.l2_error, rel=1e-3)
        assert a.h1_error == pytest.approx(b.h1_error, rel=1e-3)


def test_smooth_data_table():
    table = build_table("a", "lumped", 0.5, 1.0, range(3, 7))
    assert table.projection == "ritz" and table.normalized and table.has_gh
    assert [row.h for row in table.rows] == [1 / 8, 1 / 16, 1 / 32, 1 / 64]
    first = table.rows[0]
    assert first.l2_error == pytest.approx(3.37e-4, rel=0.05)
    assert first.h1_error == pytest.approx(2.03e-2, rel=0.03)
    assert first.gh_error == pytest.approx(4.6e-3, rel=0.05)
    assert all(3.7 <= r <= 4.3 for r in table.l2_ratios)
    assert all(1.9 <= r <= 2.1 for r in table.h1_ratios)
    assert all(3.7 <= r <= 4.3 for r in table.gh_ratios)
    assert table.log_factors == pytest.approx([k * math.log(2.0) for k in range(3, 7)])


def test_smooth_data_h1_error_is_above_the_best_approximation():
    sol = FourierSeriesSolution(InitialData("quadratic_a"), 0.5)
    mesh = Mesh1D(8)
    interpolant = NodalVector(mesh, sol.evaluate(mesh.all_nodes[1:-1], 1.0))
    best = h1_error(mesh, interpolant, sol, 1.0)
    first = build_table("a", "lumped", 0.5, 1.0, [3]).rows[0]
    assert first.h1_error >= best > 1.1 * 1.74e-2


def test_small_order_smooth_data():
    first = build_table("a", "lumped", 0.1, 1.0, [3]).rows[0]
    assert first.l2_error == pytest.approx(5.23e-4, rel=0.05)


def test_midpoint_recovery():
    table = build_table("a", "lumped", 0.5, 1.0, [3, 4], recovery="midpoint")
    assert table.rows[0].gh_error == pytest.approx(1.12e-3, rel=0.03)
    with pytest.raises(DomainError):
        build_table("a", "lumped", 0.5, 1.0, [3], recovery="patch")


def test_averaged_recovery_is_exact_for_the_quadratic():
    data = InitialData("quadratic_a")
    sol = FourierSeriesSolution(data, 0.5)
    for n_cells in (4, 8):
        mesh = Mesh1D(n_cells)
        u_h = data.interpolant(mesh)
        assert np.allclose(recovered_gradient(mesh, u_h), sol.evaluate_deriv(mesh.all_nodes, 0.0), rtol=0.0, atol=1e-4)
        assert recovered_gradient_error(mesh, u_h, sol, 0.0) <= 1e-6
        assert recovered_gradient_error(mesh, u_h, sol, 0.0, recovery="midpoint") <= 1e-6


def test_recovered_gradient_of_a_hat():
    mesh = Mesh1D(4)
    g = recovered_gradient(mesh, NodalVector(mesh, [0.0, 1.0, 0.0]))
    # slopes 0, 4, -4, 0
    assert g == pytest.approx([-2.0, 2.0, 0.0, -2.0, 2.0])
    with pytest.raises(DomainError):
        recovered_gradient_error(mesh, NodalVector.zeros(mesh), ReferenceSolution(mesh, NodalVector.zeros(mesh), 1.0), 1.0, recovery="patch")


def test_intermediate_data_first_row():
    table = build_table("b", "lumped", 0.5, 1.0, [3])
    assert table.projection == "ritz" and not table.has_gh
    assert table.rows[0].l2_error == pytest.approx(8.08e-4, rel=0.05)
    assert table.rows[0].h1_error == pytest.approx(2.075e-2, rel=0.03)


def test_galerkin_and_lumped_agree_on_smooth_data():
    lumped = build_table("a", "lumped", 0.5, 1.0, [4, 5])
    galerkin = build_table("a", "galerkin", 0.5, 1.0, [4, 5])
    for a, b in zip(lumped.rows, galerkin.rows):
        assert a.h1_error == pytest.approx(b.h1_error, rel=0.15)


def test_interpolated_step_data_loses_an_order():
    table = build_table("c3", "lumped", 0.5, 1.0, range(3, 7), projection="interpolation")
    assert 1.8 <= table.l2_ratios[-1] <= 2.3


def test_single_level_has_no_ratios():
    table = build_table("b", "lumped", 0.5, 1.0, [5])
    assert len(table.rows) == 1
    assert table.l2_ratios == [] and table.h1_ratios == []
    assert not table.has_gh


def test_levels_are_sorted_and_deduplicated():
    table = build_table("a", "lumped", 0.5, 1.0, [4, 3, 4])
    assert [row.h for row in table.rows] == [1 / 8, 1 / 16]


def test_l1_method_table():
    table = build_table("a", "l1", 0.5, 0.1, [3, 4], tau=1e-3)
    assert table.method == "l1"
    assert all(0.0 < row.l2_error < 2e-2 for row in table.rows)


def test_invalid_tables():
    with pytest.raises(DomainError):
        build_table("a", "lumped", 0.5, 1.0, [13])
    with pytest.raises(DomainError):
        build_table("a", "lumped", 0.5, 1.0, [1])
    with pytest.raises(DomainError):
        build_table("e", "lumped", 0.5, 0.01, [3])
    with pytest.raises(DomainError):
        build_table("a", "explicit", 0.5, 1.0, [3])
    with pytest.raises(DomainError):
        build_table("a", "l1", 0.5, 1.0, [3], tau=0.3)


def test_projection_rules():
    mesh = Mesh1D(8)
    k = CoefficientField.constant()
    assert default_projection("a") == "ritz"
    assert default_projection("c2") == "l2"
    assert default_projection("d") == "dirac"
    assert method_mass("galerkin") == "consistent" and method_mass("l1") == "lumped"
    with pytest.raises(DomainError):
        initial_vector(mesh, InitialData("dirac_d"), k, "l2")
    with pytest.raises(DomainError):
        initial_vector(mesh, InitialData("one_c1"), k, "dirac")
    with pytest.raises(DomainError):
        initial_vector(mesh, InitialData("one_c1"), k, "ritz")
    dirac = initial_vector(mesh, InitialData("dirac_d"), k, "dirac", "lumped")
    e = np.zeros(mesh.n_interior)
    e[3] = 1.0
    assert np.allclose(assemble_mass(mesh).matvec(dirac.values), e, atol=1e-12)
    assert np.array_equal(dirac.values, initial_vector(mesh, InitialData("dirac_d"), k, "dirac", "consistent").values)
    step = InitialData("characteristic_c3")
    assert initial_vector(mesh, step, k, "l2", "lumped").values == pytest.approx([1, 1, 1, 0.5, 0, 0, 0])
    assert not np.allclose(initial_vector(mesh, step, k, "l2", "consistent").values, [1, 1, 1, 0.5, 0, 0, 0])


def test_l1_step_count():
    assert l1_step_count(1.0, 1e-3) == 1000
    assert l1_step_count(0.01, 1e-5) == 1000
    with pytest.raises(DomainError):
        l1_step_count(1.0, 0.3)
    with pytest.raises(DomainError):
        l1_step_count(1.0, 0.0)


def test_record_and_table_checks():
    with pytest.raises(DomainError):
        ErrorRecord(0.125, 0.5, 1.0, -1.0, 1.0)
    with pytest.raises(DomainError):
        ErrorRecord(1.5, 0.5, 1.0, 1.0, 1.0)
    rows = (ErrorRecord(0.0625, 0.5, 1.0, 1.0, 1.0), ErrorRecord(0.125, 0.5, 1.0, 1.0, 1.0))
    with pytest.raises(DomainError):
        ConvergenceTable("a", "lumped", 0.5, 1.0, "ritz", rows)
    with pytest.raises(DomainError):
        ConvergenceTable("a", "lumped", 0.5, 2.0, "ritz", rows[:1])


@pytest.mark.slow
def test_intermediate_data_table():
    table = build_table("b", "lumped", 0.5, 1.0, range(3, 8), projection="l2")
    assert all(3.7 <= r <= 4.3 for r in table.l2_ratios)
    assert all(1.9 <= r <= 2.1 for r in table.h1_ratios)


@pytest.mark.slow
@pytest.mark.parametrize("example", ["c1", "c2", "c3"])
@pytest.mark.parametrize("t", [0.005, 0.01, 1.0])
def test_nonsmooth_data_tables(example, t):
    table = build_table(example, "lumped", 0.5, t, range(3, 7))
    assert table.projection == "l2"
    assert all(3.6 <= r <= 4.4 for r in table.l2_ratios)
    # the coarsest pair is still pre-asymptotic in H1 for the step
    assert all(1.9 <= r <= 2.1 for r in table.h1_ratios[1:])


@pytest.mark.slow
@pytest.mark.parametrize("example,l2,h1", [("c1", 1.06e-2, 2.08e-1), ("c2", 1.08e-2, 2.28e-1)])
def test_nonsmooth_data_first_rows(example, l2, h1):
    first = build_table(example, "lumped", 0.5, 0.005, [3]).rows[0]
    assert first.l2_error == pytest.approx(l2, rel=0.05)
    assert first.h1_error == pytest.approx(h1, rel=0.05)


@pytest.mark.slow
def test_galerkin_matches_lumped_for_step_data():
    lumped = build_table("c3", "lumped", 0.5, 1.0, range(3, 8))
    galerkin = build_table("c3", "galerkin", 0.5, 1.0, range(3, 8))
    assert all(3.6 <= r <= 4.4 for r in galerkin.l2_ratios)
    for a, b in zip(lumped.rows, galerkin.rows):
        assert 0.5 <= a.l2_error / b.l2_error <= 2.0


@pytest.mark.slow
@pytest.mark.parametrize("t,l2,h1", [(0.005, 7.24e-2, 1.51), (1.0, 5.47e-3, 1.07e-1)])
def test_point_mass_first_rows(t, l2, h1):
    table = build_table("d", "lumped", 0.5, t, [3])
    assert table.projection == "dirac" and not table.normalized
    assert table.rows[0].l2_error == pytest.approx(l2, rel=0.03)
    assert table.rows[0].h1_error == pytest.approx(h1, rel=0.03)


@pytest.mark.slow
@pytest.mark.parametrize("t", [0.005, 0.01, 1.0])
def test_point_mass_rates(t):
    table = build_table("d", "lumped", 0.5, t, range(3, 8))
    assert not table.normalized
    assert 0.0 < table.h1_floor < math.inf
    assert all(row.h1_error >= 10.0 * table.h1_floor for row in table.rows)
    assert all(2.6 <= r <= 3.0 for r in table.l2_ratios)
    assert all(1.35 <= r <= 1.47 for r in table.h1_ratios)


@pytest.mark.slow
def test_variable_coefficient_against_reference(settings):
    cfg = ExperimentConfig(example="e", method="l1", alphas=(0.5,), times=(0.01,), levels=(3, 4, 5, 6))
    (table,) = run_experiment(cfg)
    assert table.method == "l1"
    assert all(3.7 <= r <= 4.3 for r in table.l2_ratios)
    assert all(1.85 <= r <= 2.15 for r in table.h1_ratios)


@pytest.mark.slow
def test_variable_coefficient_semidiscrete_against_reference(settings):
    cfg = ExperimentConfig(example="e", method="lumped", alphas=(0.5,), times=(0.01,), levels=(3, 4, 5, 6))
    (table,) = run_experiment(cfg)
    assert table.method == "lumped" and table.h1_floor == 0.0
    assert all(3.7 <= r <= 4.3 for r in table.l2_ratios)
    assert all(1.9 <= r <= 2.15 for r in table.h1_ratios)
