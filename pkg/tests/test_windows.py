"""Unit tests for windows module."""

import json
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

from steklov_windows.errors import ConfigError, MeasureError
from steklov_windows.fem import solve_p2
from steklov_windows.geometry import OscillationSpec, build_base_domain, generate_mesh
from steklov_windows.measures import mu_star_measure, surface_measure
from steklov_windows.windows import (
    Window,
    bathtub_update,
    contiguous_arc_oracle,
    initial_arc,
    optimize_window,
    reflect_window,
    solve_limit_problem,
    write_window,
)


@pytest.fixture(scope="module")
def mesh():
    return generate_mesh(build_base_domain("square", resolution=1 / 8), 0.125)


@pytest.fixture(scope="module")
def measure(mesh):
    return surface_measure(mesh)


class TestWindow:
    """Tests for Window and initial_arc."""

    def test_initial_arc_measure(self, measure):
        """Test that the initial arc has measure α·total with one split edge."""
        window = initial_arc(measure, 0.3)
        assert abs(window.measure - 0.3 * measure.total) < 1e-12
        assert abs(window.alpha - 0.3) < 1e-12
        assert window.n_fractional == 1
        assert window.fractions[0] == 1.0

    def test_initial_arc_start(self, measure):
        """Test that the arc begins at the requested edge."""
        window = initial_arc(measure, 0.1, start=5)
        assert window.fractions[4] == 0.0
        assert window.fractions[5] == 1.0

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
    def test_alpha_out_of_range(self, measure, alpha):
        """Test that α must lie in (0, 1)."""
        with pytest.raises(ConfigError):
            initial_arc(measure, alpha)

    def test_fraction_bounds(self):
        """Test that fractions outside [0, 1] are rejected."""
        with pytest.raises(MeasureError):
            Window(np.array([0.5, 1.2]), np.ones(2), 1.0)

    def test_shape_mismatch(self):
        """Test that fractions and weights must have the same length."""
        with pytest.raises(MeasureError):
            Window(np.zeros(3), np.ones(2), 1.0)

    def test_changed_edges(self, measure):
        """Test counting of edges whose fraction differs."""
        a = initial_arc(measure, 0.25, start=0)
        b = initial_arc(measure, 0.25, start=2)
        assert a.changed_edges(a) == 0
        assert a.changed_edges(b) == 4


class TestBathtub:
    """Tests for bathtub_update."""

    def test_picks_smallest_values(self, mesh, measure):
        """Test that u = y puts the window on the bottom edge."""
        pair = SimpleNamespace(u=mesh.nodes[:, 1].copy(), p=2.0)
        window = bathtub_update(mesh, pair, 0.25, measure)
        bottom = np.isclose(mesh.edge_midpoints[:, 1], 0.0)
        assert np.all(window.fractions[bottom] == 1.0)
        assert np.all(window.fractions[~bottom] == 0.0)
        assert abs(window.measure - 1.0) < 1e-12

    def test_ties_take_lowest_indices(self, mesh, measure):
        """Test that a constant u selects the contiguous arc from edge 0."""
        pair = SimpleNamespace(u=np.ones(mesh.n_nodes), p=2.0)
        window = bathtub_update(mesh, pair, 0.3, measure)
        assert np.array_equal(window.fractions, initial_arc(measure, 0.3, start=0).fractions)
        full = np.flatnonzero(window.fractions == 1.0)
        assert np.array_equal(full, np.arange(len(full)))

    def test_measure_mismatch(self, mesh):
        """Test that the measure must live on the mesh boundary."""
        pair = SimpleNamespace(u=np.zeros(mesh.n_nodes), p=2.0)
        with pytest.raises(MeasureError):
            bathtub_update(mesh, pair, 0.3, surface_measure(generate_mesh(build_base_domain(), 0.25)))


class TestReflectWindow:
    """Tests for reflect_window."""

    def test_bottom_arc(self, mesh, measure):
        """Test that [0, 1/4] on the bottom reflects to [3/4, 1]."""
        window = initial_arc(measure, 0.0625)
        reflected = reflect_window(window, mesh)
        bottom = np.isclose(mesh.edge_midpoints[:, 1], 0.0)
        right = bottom & (mesh.edge_midpoints[:, 0] > 0.75)
        assert np.allclose(reflected.fractions[right], 1.0)
        assert np.allclose(reflected.fractions[~right], 0.0, atol=1e-12)
        assert abs(reflected.measure - window.measure) < 1e-12

    def test_involution(self, mesh, measure):
        """Test that reflecting twice gives the window back."""
        window = initial_arc(measure, 0.3, start=3)
        twice = reflect_window(reflect_window(window, mesh), mesh)
        assert np.allclose(twice.fractions, window.fractions, atol=1e-12)


class TestOptimizeWindow:
    """Tests for optimize_window and the arc oracle."""

    def test_optimize(self, mesh, measure):
        """Test the measure constraint and the best pair of the trace."""
        window, pair, trace = optimize_window(mesh, 0.3, 2.0, measure, restarts=1)
        assert abs(window.measure - 0.3 * measure.total) < 1e-12
        assert pair.lam == trace.best_lambda
        assert pair.lam <= trace.lambdas[0]
        assert np.all(np.diff(trace.best_history) <= 0)
        assert trace.restarts <= 1

    def test_not_worse_than_oracle(self, mesh, measure):
        """Test that scanning every arc first never ends above the best arc."""
        oracle = contiguous_arc_oracle(mesh, 0.3, 2.0, measure)
        assert len(oracle.lambdas) == mesh.n_boundary_edges
        _, pair, _ = optimize_window(mesh, 0.3, 2.0, measure, restarts=0, arc_scan=mesh.n_boundary_edges)
        assert pair.lam <= oracle.lam

    def test_lambda_increases_with_alpha(self, mesh, measure):
        """Test that λ(α) is non-decreasing over α ∈ {0.1, 0.3, 0.5}."""
        lambdas = [optimize_window(mesh, alpha, 2.0, measure, restarts=0)[1].lam for alpha in (0.1, 0.3, 0.5)]
        assert lambdas[0] >= solve_p2(mesh, None, measure).lam
        assert all(b >= a for a, b in zip(lambdas, lambdas[1:]))

    def test_small_alpha_near_free_lambda(self, mesh, measure):
        """Test that α = 0.01 stays within 5% of the unconstrained λ."""
        free = solve_p2(mesh, None, measure).lam
        _, pair, _ = optimize_window(mesh, 0.01, 2.0, measure, restarts=0)
        assert abs(pair.lam - free) <= 0.05 * free

    def test_reflection_equivariance(self, mesh, measure):
        """Test that the mirror image of the optimal window has the same λ."""
        window, pair, _ = optimize_window(mesh, 0.3, 2.0, measure, restarts=0)
        mirrored = solve_p2(mesh, reflect_window(window, mesh), measure)
        assert np.isclose(mirrored.lam, pair.lam, rtol=1e-2)

    def test_limit_problem_with_flat_weight(self, mesh, measure):
        """Test that μ* for f ≡ 0 reproduces the surface-measure optimum."""
        _, surface_pair, _ = optimize_window(mesh, 0.3, 2.0, measure, restarts=0)
        weight = mu_star_measure(mesh, OscillationSpec.flat())
        _, limit_pair = solve_limit_problem(mesh, weight, 0.3, 2.0, restarts=0)
        assert np.isclose(limit_pair.lam, surface_pair.lam, rtol=1e-12)
        assert limit_pair.boundary_measure_id == "WeightedMu*"


class TestWriteWindow:
    """Tests for write_window."""

    def test_csv_and_summary(self, mesh, measure, tmp_path: Path):
        """Test the window CSV and its JSON summary."""
        window = initial_arc(measure, 0.3)
        path = write_window(mesh, window, tmp_path / "window.csv", lam=1.5, iterations=4)
        lines = path.read_text().splitlines()
        assert lines[0] == "edge,fraction,s_start,s_end"
        assert len(lines) == mesh.n_boundary_edges + 1
        summary = json.loads(path.with_suffix(".json").read_text())
        assert abs(summary["alpha"] - 0.3) < 1e-12
        assert summary["lambda"] == 1.5
        assert summary["iterations"] == 4
