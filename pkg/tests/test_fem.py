"""Unit tests for fem module."""

import json
from pathlib import Path

import numpy as np
import pytest
from scipy.special import iv

from steklov_windows.errors import ConfigError, InfeasibleError, SolverError
from steklov_windows.fem import (
    EnergyFunctional,
    RayleighQuotient,
    SolverConfig,
    assemble_energy,
    boundary_lp_norm,
    boundary_mass_matrix,
    boundary_power,
    pinned_nodes,
    solve_p2,
    solve_p_general,
    write_eigenpair,
)
from steklov_windows.geometry import OscillationSpec, build_base_domain, generate_mesh, refine_mesh
from steklov_windows.measures import DiscreteBoundaryMeasure, MeasureKind, mu_star_measure, surface_measure
from steklov_windows.windows import Window, initial_arc, solve_limit_problem


@pytest.fixture(scope="module")
def mesh():
    return generate_mesh(build_base_domain("square", resolution=1 / 8), 0.125)


@pytest.fixture(scope="module")
def measure(mesh):
    return surface_measure(mesh)


def _random_nodal(mesh, seed: int = 1) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.5, 1.5, mesh.n_nodes)


def _central_differences(func, u: np.ndarray, step: float = 1e-6) -> np.ndarray:
    fd = np.empty_like(u)
    for i in range(len(u)):
        e = np.zeros_like(u)
        e[i] = step
        fd[i] = (func(u + e) - func(u - e)) / (2 * step)
    return fd


class TestEnergy:
    """Tests for energies and boundary norms."""

    def test_constant_energy_is_area(self, mesh):
        """Test that Q(1) is the area for every p."""
        ones = np.ones(mesh.n_nodes)
        assert abs(assemble_energy(mesh, 2.0, ones) - 1.0) < 1e-12
        assert abs(assemble_energy(mesh, 3.0, ones) - 1.0) < 1e-12

    def test_quadratic_form(self, mesh):
        """Test that the p = 2 matrix reproduces Q."""
        energy = EnergyFunctional.plain(mesh)
        u = _random_nodal(mesh)
        assert np.isclose(u @ (energy.matrix() @ u), energy.value(u), rtol=1e-12)

    def test_linear_function_energy(self, mesh):
        """Test that |∇x|² integrates to the area."""
        x = mesh.nodes[:, 0]
        stiffness = EnergyFunctional.plain(mesh).value(x) - EnergyFunctional.plain(mesh).mass @ x**2
        assert abs(stiffness - 1.0) < 1e-12

    @pytest.mark.parametrize("seed", range(10))
    def test_gradient_finite_differences(self, mesh, seed):
        """Test the p = 3 gradient against central differences at every node."""
        energy = EnergyFunctional.plain(mesh, 3.0)
        u = _random_nodal(mesh, seed)
        fd = _central_differences(energy.value, u)
        assert np.all(np.abs(energy.gradient(u) - fd) < 1e-6 * np.maximum(1.0, np.abs(fd)))

    @pytest.mark.parametrize("seed", range(10))
    def test_quotient_gradient(self, mesh, measure, seed):
        """Test the Rayleigh quotient gradient against central differences at every node."""
        quotient = RayleighQuotient(EnergyFunctional.plain(mesh, 3.0), measure.weights)
        u = _random_nodal(mesh, seed + 100)
        fd = _central_differences(quotient.value, u)
        assert np.all(np.abs(quotient.gradient(u) - fd) < 1e-6 * np.maximum(1.0, np.abs(fd)))

    @pytest.mark.parametrize("p", [2.0, 3.0, 4.5])
    def test_energy_homogeneity(self, mesh, p):
        """Test Q(tu) = |t|^p Q(u)."""
        u = _random_nodal(mesh, seed=3) - 1.0
        for t in (-2.5, 0.1, 7.0):
            assert np.isclose(assemble_energy(mesh, p, t * u), abs(t) ** p * assemble_energy(mesh, p, u), rtol=1e-10)

    @pytest.mark.parametrize("p", [2.0, 3.0, 4.5])
    def test_boundary_norm_homogeneity(self, mesh, measure, p):
        """Test ‖tu‖ = |t| ‖u‖ on the boundary."""
        u = _random_nodal(mesh, seed=4) - 1.0
        norm = boundary_lp_norm(mesh, p, u, measure)
        for t in (-2.5, 0.1, 7.0):
            assert np.isclose(boundary_lp_norm(mesh, p, t * u, measure), abs(t) * norm, rtol=1e-10)

    def test_invalid_exponent(self, mesh):
        """Test that p < 2 is rejected."""
        with pytest.raises(ConfigError):
            EnergyFunctional.plain(mesh, 1.5)

    def test_boundary_power_of_one(self, mesh, measure):
        """Test that ∫ 1 dS is the perimeter."""
        ones = np.ones(mesh.n_nodes)
        assert abs(boundary_power(mesh, 2.0, ones, measure.weights) - 4.0) < 1e-12
        assert abs(boundary_lp_norm(mesh, 4.0, ones, measure) - 4.0**0.25) < 1e-12

    def test_boundary_mass_matrix(self, mesh, measure):
        """Test that the consistent mass matrix matches Simpson's rule on linear data."""
        mass = boundary_mass_matrix(mesh, measure.weights)
        u = mesh.nodes[:, 0] + 2 * mesh.nodes[:, 1]
        assert np.isclose(u @ (mass @ u), boundary_power(mesh, 2.0, u, measure.weights), rtol=1e-12)


class TestPinnedNodes:
    """Tests for the Dirichlet node rule."""

    def test_no_window(self, mesh):
        """Test that no window pins nothing."""
        assert not pinned_nodes(mesh, None).any()

    def test_full_edges(self, mesh):
        """Test that nodes between two window edges are pinned."""
        fractions = np.zeros(mesh.n_boundary_edges)
        fractions[:3] = 1.0
        pinned = pinned_nodes(mesh, fractions)
        assert pinned[mesh.boundary_nodes[1]]
        assert pinned[mesh.boundary_nodes[2]]
        assert not pinned[mesh.boundary_nodes[5]]


class TestSolveP2:
    """Tests for solve_p2."""

    def test_no_window(self, mesh, measure):
        """Test the unconstrained eigenpair."""
        pair = solve_p2(mesh, None, measure)
        assert pair.lam > 0
        assert pair.residual <= 1e-8
        assert abs(boundary_power(mesh, 2.0, pair.u, measure.weights) - 1.0) < 1e-12
        assert pair.boundary_measure_id == "Surface"

    def test_window_raises_lambda(self, mesh, measure):
        """Test that pinning a window increases λ."""
        free = solve_p2(mesh, None, measure)
        window = initial_arc(measure, 0.3)
        constrained = solve_p2(mesh, window, measure)
        assert constrained.lam > free.lam
        assert np.all(constrained.u[constrained.pinned] == 0.0)

    def test_whole_boundary_window(self, mesh, measure):
        """Test that a window covering everything is infeasible."""
        window = Window(np.ones(mesh.n_boundary_edges), measure.weights, measure.total)
        with pytest.raises(InfeasibleError):
            solve_p2(mesh, window, measure)

    def test_not_converged(self, mesh, measure):
        """Test that one iteration is not enough."""
        with pytest.raises(SolverError):
            solve_p2(mesh, None, measure, SolverConfig(max_iter=1))

    def test_config_validation(self):
        """Test that tolerances and caps are validated."""
        with pytest.raises(ConfigError):
            SolverConfig(tol_lambda=0.0)
        with pytest.raises(ConfigError):
            SolverConfig(max_iter=0)

    def test_refinement_does_not_raise_lambda(self, mesh, measure):
        """Test that λ on the refined mesh is not above the coarse λ."""
        fine = refine_mesh(mesh)
        coarse = solve_p2(mesh, None, measure)
        refined = solve_p2(fine, None, surface_measure(fine))
        assert refined.lam <= coarse.lam

    def test_initial_scale_invariance(self, mesh, measure):
        """Test that scaling the initial guess by 10 leaves λ unchanged."""
        window = initial_arc(measure, 0.3)
        u0 = _random_nodal(mesh, seed=5)
        pair = solve_p2(mesh, window, measure, initial=u0)
        scaled = solve_p2(mesh, window, measure, initial=10.0 * u0)
        assert np.isclose(scaled.lam, pair.lam, rtol=1e-10)

    def test_weight_scaling(self, mesh):
        """Test λ*(c·m) = λ*(m) / c for c = 2."""
        weight = mu_star_measure(mesh, OscillationSpec(a=1.0))
        doubled = DiscreteBoundaryMeasure(MeasureKind.MU_STAR, 2.0 * weight.weights)
        window, pair = solve_limit_problem(mesh, weight, 0.3, 2.0, restarts=0)
        window2, pair2 = solve_limit_problem(mesh, doubled, 0.3, 2.0, restarts=0)
        assert np.array_equal(window2.fractions, window.fractions)
        assert np.isclose(pair2.lam, pair.lam / 2.0, rtol=1e-10)

    def test_disk_oracle(self):
        """Test the unit disk against I1(1)/I0(1)."""
        disk = generate_mesh(build_base_domain("disk"), 0.05)
        pair = solve_p2(disk, None, surface_measure(disk))
        exact = iv(1, 1.0) / iv(0, 1.0)
        assert abs(pair.lam - exact) / exact < 0.02


class TestSolvePGeneral:
    """Tests for solve_p_general."""

    def test_descent_from_p2_start(self, mesh, measure):
        """Test that descent never increases the p-quotient of the p = 2 start."""
        window = initial_arc(measure, 0.3)
        start = solve_p2(mesh, window, measure)
        quotient = RayleighQuotient(EnergyFunctional.plain(mesh, 3.0), measure.weights)
        pair = solve_p_general(mesh, window, measure, 3.0)
        assert pair.p == 3.0
        assert pair.lam <= quotient.value(start.u) + 1e-12
        assert abs(boundary_power(mesh, 3.0, pair.u, measure.weights) - 1.0) < 1e-10

    def test_matches_p2_solver(self, mesh, measure):
        """Test that the descent solver at p = 2 agrees with inverse iteration."""
        window = initial_arc(measure, 0.3)
        direct = solve_p2(mesh, window, measure)
        general = solve_p_general(mesh, window, measure, 2.0)
        assert abs(general.lam - direct.lam) <= 1e-6 * direct.lam

    def test_initial_scale_invariance(self, mesh, measure):
        """Test that scaling the initial guess by 10 leaves the p = 3 λ unchanged."""
        u0 = _random_nodal(mesh, seed=6)
        pair = solve_p_general(mesh, None, measure, 3.0, initial=u0)
        scaled = solve_p_general(mesh, None, measure, 3.0, initial=10.0 * u0)
        assert np.isclose(scaled.lam, pair.lam, rtol=1e-10)

    def test_invalid_exponent(self, mesh, measure):
        """Test that p < 2 is rejected."""
        with pytest.raises(ConfigError):
            solve_p_general(mesh, None, measure, 1.5)


class TestWriteEigenpair:
    """Tests for write_eigenpair."""

    def test_csv_and_summary(self, mesh, measure, tmp_path: Path):
        """Test the nodal CSV and its JSON summary."""
        pair = solve_p2(mesh, None, measure)
        path = write_eigenpair(mesh, pair, tmp_path / "pair.csv", alpha=0.3)
        lines = path.read_text().splitlines()
        assert lines[0] == "node,x,y,u"
        assert len(lines) == mesh.n_nodes + 1
        summary = json.loads(path.with_suffix(".json").read_text())
        assert summary["lambda"] == pair.lam
        assert summary["alpha"] == 0.3
        assert summary["p"] == 2.0
