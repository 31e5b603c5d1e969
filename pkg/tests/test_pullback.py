"""Unit tests for the pulled-back problem on the fixed domain."""

import numpy as np
import pytest

from steklov_windows.errors import MapError
from steklov_windows.experiments import run_pullback_check, solve_pullback
from steklov_windows.fem import assemble_energy, pullback_energy
from steklov_windows.geometry import OscillationSpec, build_base_domain, generate_mesh
from steklov_windows.transforms import PerturbationMap


@pytest.fixture(scope="module")
def base_mesh():
    return generate_mesh(build_base_domain(), 1 / 32)


class TestPullbackEnergy:
    """Tests for the pulled-back energy Q̃_ε."""

    def test_identity_map(self, base_mesh):
        """Test that f ≡ 0 leaves Q unchanged."""
        pmap = PerturbationMap(build_base_domain(), OscillationSpec.flat(), 0.25)
        u = 1.0 + base_mesh.nodes[:, 0] * base_mesh.nodes[:, 1]
        assert pullback_energy(base_mesh, pmap, 2.0, u) == assemble_energy(base_mesh, 2.0, u)

    def test_constant_is_perturbed_area(self, base_mesh):
        """Test that Q̃_ε(1) approximates |Ω_ε| = 1 + ε^a/2."""
        pmap = PerturbationMap(build_base_domain(), OscillationSpec(a=2.0), 0.5)
        value = pullback_energy(base_mesh, pmap, 2.0, np.ones(base_mesh.n_nodes))
        assert abs(value - (1.0 + 0.5**2 / 2)) < 1e-2


class TestSolvePullback:
    """Tests for solve_pullback and run_pullback_check."""

    def test_not_diffeomorphic(self, base_mesh):
        """Test that the pulled-back problem needs a diffeomorphism."""
        pmap = PerturbationMap(build_base_domain(), OscillationSpec(a=1.0), 0.5)
        with pytest.raises(MapError):
            solve_pullback(base_mesh, pmap, 0.3, 2.0)

    def test_flat_profile_gap(self):
        """Test that without oscillation both problems share one mesh and agree below the solver tolerance."""
        comparison = run_pullback_check(build_base_domain(), OscillationSpec.flat(), 0.25, 0.3, restarts=0)
        assert comparison.gap < 1e-10
        assert comparison.direct.boundary_measure_id == "Surface"
        assert comparison.pullback.boundary_measure_id == "PulledBackMuEps"
