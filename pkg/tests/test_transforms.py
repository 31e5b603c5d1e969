"""Unit tests for transforms module."""

from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad

from steklov_windows.errors import ConfigError, MapError
from steklov_windows.geometry import ChartFunction, OscillationSpec, build_base_domain
from steklov_windows.transforms import (
    PerturbationMap,
    apply_T_eps,
    apply_T_eps_inverse,
    cutoff_phi,
    homogenized_weight,
    homogenized_weights,
    jacobian_at,
    limit_density,
    tangential_jacobian_inverse,
    weakstar_test,
    weight_field,
    write_weakstar_csv,
)


@pytest.fixture
def supercritical_map():
    return PerturbationMap(build_base_domain(), OscillationSpec(a=2.0), 0.25)


def _grid(n: int = 9) -> np.ndarray:
    x, y = np.meshgrid(np.linspace(0.05, 0.95, n), np.linspace(0.05, 0.95, n))
    return np.column_stack([x.ravel(), y.ravel()])


class TestPerturbationMap:
    """Tests for the forward and inverse map."""

    def test_round_trip(self, supercritical_map):
        """Test that the inverse undoes the forward map."""
        points = _grid()
        back = apply_T_eps_inverse(supercritical_map, apply_T_eps(supercritical_map, points))
        assert np.allclose(back, points, atol=1e-11)

    def test_chart_maps_to_base_chart(self, supercritical_map):
        """Test that the perturbed chart lands on the graph of Φ."""
        pmap = supercritical_map
        x = np.linspace(0.0, 1.0, 33)
        chart = np.column_stack([x, pmap.domain.phi(x) + pmap.amplitude * pmap.osc.f(x / pmap.eps)])
        assert np.allclose(pmap.forward(chart)[:, 1], pmap.domain.phi(x), atol=1e-12)

    def test_identity_away_from_chart(self, supercritical_map):
        """Test that points deeper than √ε do not move."""
        points = np.array([[0.3, 0.1], [0.7, 0.4]])
        assert np.array_equal(supercritical_map.forward(points), points)

    def test_only_height_moves(self, supercritical_map):
        """Test that x' is preserved."""
        points = _grid()
        assert np.array_equal(supercritical_map.forward(points)[:, 0], points[:, 0])

    def test_flat_profile_is_identity(self):
        """Test that f ≡ 0 gives the identity map."""
        pmap = PerturbationMap(build_base_domain(), OscillationSpec.flat(), 0.25)
        assert pmap.is_identity
        points = _grid(3)
        assert np.array_equal(pmap.forward(points), points)
        assert np.array_equal(pmap.inverse(points), points)

    def test_not_diffeomorphic(self):
        """Test that a = 1 on two cells fails the determinant bound."""
        pmap = PerturbationMap(build_base_domain(), OscillationSpec(a=1.0), 0.5)
        assert pmap.min_det < 0
        with pytest.raises(MapError):
            pmap.forward(_grid(3))

    def test_min_det_bound(self, supercritical_map):
        """Test that sampled determinants respect the lower bound."""
        _, det = supercritical_map.jacobian(_grid(21))
        assert np.all(det >= supercritical_map.min_det - 1e-12)

    def test_eps_must_be_reciprocal(self):
        """Test that ε must be 1/k."""
        with pytest.raises(ConfigError):
            PerturbationMap(build_base_domain(), OscillationSpec(), 0.3)

    def test_cutoff(self):
        """Test that φ_ε is 1 on the chart and 0 deeper than √ε."""
        domain = build_base_domain()
        values = cutoff_phi(np.array([[0.5, 1.0], [0.5, 0.75], [0.5, 0.4]]), 0.25, domain)
        assert values[0] == 1.0
        assert 0.0 < values[1] < 1.0
        assert values[2] == 0.0

    def test_cutoff_on_walls(self):
        """Test that φ_ε vanishes on the bottom wall and deep on the side walls."""
        domain = build_base_domain()
        bottom = np.column_stack([np.linspace(0.0, 1.0, 9), np.zeros(9)])
        assert np.all(cutoff_phi(bottom, 0.25, domain) == 0.0)
        deep = np.array([[0.0, 0.3], [1.0, 0.3], [0.0, 0.5]])
        assert np.all(cutoff_phi(deep, 0.25, domain) == 0.0)
        assert 0.0 < cutoff_phi(np.array([[0.0, 0.8]]), 0.25, domain)[0] < 1.0

    def test_side_walls_map_to_themselves(self):
        """Test that T_ε keeps x' on the side walls even where f(0) ≠ 0."""
        osc = OscillationSpec(profile="fourier", a=2.0, coefficients=((0.1, 0.0),))
        pmap = PerturbationMap(build_base_domain(), osc, 0.25)
        walls = np.array([[0.0, 0.8], [1.0, 0.8], [0.0, 0.2]])
        mapped = apply_T_eps(pmap, walls)
        assert np.array_equal(mapped[:, 0], walls[:, 0])
        assert mapped[0, 1] < 0.8
        assert mapped[2, 1] == 0.2


class TestJacobian:
    """Tests for Jacobians of the map."""

    def test_against_finite_differences(self, supercritical_map):
        """Test DT against central differences in the transition layer."""
        pmap = supercritical_map
        points = np.array([[0.3, 0.7], [0.55, 0.8], [0.9, 0.62]])
        dt, det = pmap.jacobian(points)
        step = 1e-6
        for j, direction in enumerate(np.eye(2)):
            fd = (pmap.forward(points + step * direction) - pmap.forward(points - step * direction)) / (2 * step)
            assert np.allclose(dt[:, :, j], fd, atol=1e-7)
        assert np.allclose(det, np.linalg.det(dt))

    def test_tangential_jacobian_on_chart(self):
        """Test that J_τ on the chart is the flat over perturbed arclength ratio."""
        pmap = PerturbationMap(build_base_domain(), OscillationSpec(a=1.0), 1 / 8)
        for x in (0.1, 0.37, 0.8):
            point = (x, float(pmap.domain.phi(x) + pmap.amplitude * pmap.osc.f(x / pmap.eps)))
            bundle = jacobian_at(pmap, point)
            assert bundle.Jtau is not None
            assert abs(bundle.Jtau * float(tangential_jacobian_inverse(pmap, x)) - 1.0) < 1e-12

    def test_interior_point_has_no_tangential_part(self, supercritical_map):
        """Test that J_τ is only filled in on the chart."""
        bundle = jacobian_at(supercritical_map, (0.5, 0.5))
        assert bundle.Jtau is None
        assert bundle.J == 1.0


class TestHomogenizedWeight:
    """Tests for m."""

    def test_against_adaptive_quadrature(self):
        """Test m(0) for sin²(πy) against scipy quad."""
        osc = OscillationSpec()
        integrand = lambda y: np.sqrt(1.0 + (np.pi * np.sin(2 * np.pi * y)) ** 2)  # noqa: E731
        expected, _ = quad(integrand, 0.0, 1.0, limit=200, epsabs=1e-13, epsrel=1e-13)
        assert abs(homogenized_weight(0.0, osc) - expected) < 1e-10

    def test_vectorized_matches_scalar(self):
        """Test that the batched path agrees with the scalar one."""
        osc = OscillationSpec()
        slopes = np.linspace(-1.0, 1.0, 40)
        batched = homogenized_weights(slopes, osc)
        scalar = np.array([homogenized_weight(s, osc) for s in slopes])
        assert np.allclose(batched, scalar, atol=1e-11)
        assert np.all(batched >= 1.0)

    def test_flat_profile(self):
        """Test that f ≡ 0 gives m ≡ 1."""
        assert np.all(homogenized_weights(np.linspace(-1, 1, 5), OscillationSpec.flat()) == 1.0)

    def test_too_few_panels(self):
        """Test that fewer than 16 panels per cell is rejected."""
        with pytest.raises(ConfigError):
            homogenized_weight(0.0, OscillationSpec(), quad_order=8)

    def test_weight_field_total(self):
        """Test μ*(∂Ω) = 3 + m(0) on the unit square."""
        osc = OscillationSpec()
        field = weight_field(build_base_domain(), osc)
        assert abs(field.total_weighted_length - (3.0 + homogenized_weight(0.0, osc))) < 1e-10


class TestLimitDensity:
    """Tests for limit_density."""

    def test_subcritical_has_no_limit(self):
        """Test that a < 1 is rejected."""
        with pytest.raises(ConfigError):
            limit_density(np.zeros(3), OscillationSpec(a=0.5))

    def test_supercritical_is_one(self):
        """Test that a > 1 gives the surface measure."""
        assert np.all(limit_density(np.zeros(3), OscillationSpec(a=2.0)) == 1.0)

    def test_critical_is_weight(self):
        """Test that a = 1 gives m."""
        osc = OscillationSpec(a=1.0)
        slopes = np.array([0.0, 0.5])
        assert np.allclose(limit_density(slopes, osc), homogenized_weights(slopes, osc))


class TestWeakStar:
    """Tests for weakstar_test."""

    @pytest.mark.parametrize(
        "g_id,g",
        [("one", np.ones_like), ("cos", lambda x: np.cos(2 * np.pi * x)), ("x", lambda x: x)],
    )
    def test_symmetric_functions_vanish(self, g_id, g):
        """Test that functions orthogonal to the cell oscillation have zero error."""
        rows = weakstar_test(g, [1 / 4, 1 / 8, 1 / 16], OscillationSpec(a=1.0), ChartFunction(), g_id)
        assert [r.k for r in rows] == [4, 8, 16]
        assert all(r.error <= 1e-9 for r in rows)

    def test_error_decreases(self):
        """Test that the error for x² decreases along ε = 1/k."""
        rows = weakstar_test(lambda x: x**2, [1 / 4, 1 / 8, 1 / 16, 1 / 32], OscillationSpec(a=1.0), ChartFunction())
        errors = [r.error for r in rows]
        assert all(b < a for a, b in zip(errors, errors[1:]))

    def test_write_csv(self, tmp_path: Path):
        """Test the weak-* CSV layout."""
        rows = weakstar_test(lambda x: x**2, [1 / 4], OscillationSpec(a=1.0), ChartFunction(), "x2")
        path = write_weakstar_csv(rows, tmp_path / "out" / "weakstar.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "k,eps,g_id,error"
        assert lines[1].startswith("4,0.25,x2,")
