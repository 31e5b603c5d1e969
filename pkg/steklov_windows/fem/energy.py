"""P1 energies Q(u) = ∫ |∇u|^p + |u|^p, boundary L^p norms and Rayleigh quotients.

The same ``EnergyFunctional`` evaluates Q on Ω, Q_ε on an Ω_ε mesh, and the
pulled-back Q̃_ε on Ω: the latter only changes the per-triangle quadrature data
(a metric DT_ε∘T_ε^{-1} and weights divided by JT_ε).

Code map:
    EnergyFunctional           value(), gradient(), matrix() for p = 2
    pullback_functional()      Q̃_ε quadrature data from a PerturbationMap
    assemble_energy()          Q(u) on a mesh
    pullback_energy()          Q̃_ε(v) on the base mesh
    boundary_power()           ∫_{∂Ω} |u|^p dμ by Simpson per edge
    boundary_lp_norm()         p-th root of boundary_power()
    boundary_mass_matrix()     Consistent edge mass matrix for p = 2
    RayleighQuotient           Q(u) / ∫|u|^p dμ with its gradient
"""

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from ..errors import ConfigError
from ..geometry.mesh import TriMesh
from ..transforms.perturbation import PerturbationMap

# Interior 3-point rule (barycentric 2/3, 1/6, 1/6), exact for quadratics.
_BARY = np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]])


def shape_gradients(mesh: TriMesh) -> np.ndarray:
    """Gradients of the three barycentric basis functions of every triangle, shape (T, 3, 2)."""
    p = mesh.nodes[mesh.triangles]
    d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    g1 = np.column_stack([d2[:, 1], -d2[:, 0]]) / det[:, None]
    g2 = np.column_stack([-d1[:, 1], d1[:, 0]]) / det[:, None]
    return np.stack([-g1 - g2, g1, g2], axis=1)


def _lumped_vertex_weights(mesh: TriMesh) -> np.ndarray:
    return np.bincount(mesh.triangles.ravel(), weights=np.repeat(mesh.areas / 3.0, 3), minlength=mesh.n_nodes)


@dataclass(frozen=True, eq=False)
class EnergyFunctional:
    """Q(u) = Σ_T Σ_q W_tq |∇u_T M_tq|^p + Σ_i c_i |u_i|^p.

    Attributes:
        mesh: Mesh the nodal vectors live on.
        p: Exponent, at least 2.
        grads: Basis gradients per triangle.
        weights: Quadrature weights ``W`` of shape (T, Q).
        metric: Row-vector metrics ``M`` of shape (T, Q, 2, 2), or None for the identity.
        mass: Vertex weights ``c`` of the |u|^p term.
    """

    mesh: TriMesh
    p: float
    grads: np.ndarray
    weights: np.ndarray
    metric: np.ndarray | None
    mass: np.ndarray

    @classmethod
    def plain(cls, mesh: TriMesh, p: float = 2.0) -> "EnergyFunctional":
        if p < 2:
            raise ConfigError("p", f"exponent must be >= 2, got {p}")
        return cls(mesh, float(p), shape_gradients(mesh), mesh.areas[:, None], None, _lumped_vertex_weights(mesh))

    def with_exponent(self, p: float) -> "EnergyFunctional":
        if p < 2:
            raise ConfigError("p", f"exponent must be >= 2, got {p}")
        return replace(self, p=float(p))

    def _element_gradients(self, u: np.ndarray) -> np.ndarray:
        g = np.einsum("tij,ti->tj", self.grads, u[self.mesh.triangles])
        if self.metric is None:
            return g[:, None, :]
        return np.einsum("tj,tqjk->tqk", g, self.metric)

    def value(self, u: np.ndarray) -> float:
        u = self.mesh.check_nodal(u)
        r = np.linalg.norm(self._element_gradients(u), axis=2)
        return float(np.sum(self.weights * r**self.p) + self.mass @ np.abs(u) ** self.p)

    def gradient(self, u: np.ndarray) -> np.ndarray:
        u = self.mesh.check_nodal(u)
        p = self.p
        rvec = self._element_gradients(u)
        coef = p * self.weights * np.linalg.norm(rvec, axis=2) ** (p - 2.0)
        if self.metric is None:
            flux = coef[:, 0, None] * rvec[:, 0, :]
        else:
            flux = np.einsum("tq,tqk,tqjk->tj", coef, rvec, self.metric)
        local = np.einsum("tij,tj->ti", self.grads, flux)
        grad = np.bincount(self.mesh.triangles.ravel(), weights=local.ravel(), minlength=self.mesh.n_nodes)
        return grad + self.mass * p * np.abs(u) ** (p - 2.0) * u

    def matrix(self) -> sp.csr_matrix:
        """Stiffness plus lumped mass of the p = 2 quadratic form."""
        if self.metric is None:
            coeff = self.weights[:, 0, None, None] * np.eye(2)[None, :, :]
        else:
            coeff = np.einsum("tq,tqjk,tqlk->tjl", self.weights, self.metric, self.metric)
        local = np.einsum("tij,tjk,tlk->til", self.grads, coeff, self.grads)
        tri = self.mesh.triangles
        rows = np.repeat(tri, 3, axis=1).ravel()
        cols = np.tile(tri, (1, 3)).ravel()
        n = self.mesh.n_nodes
        stiffness = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
        return (stiffness + sp.diags(self.mass)).tocsr()


def pullback_functional(mesh: TriMesh, pmap: PerturbationMap, p: float = 2.0) -> EnergyFunctional:
    """Quadrature data for Q̃_ε(v) = ∫_Ω |∇v (DT_ε∘T_ε^{-1})|^p + |v|^p with weight JT_ε^{-1}.

    Raises:
        MapError: If T_ε is not a diffeomorphism or cannot be inverted.
    """
    plain = EnergyFunctional.plain(mesh, p)
    if pmap.is_identity:
        return plain

    corners = mesh.nodes[mesh.triangles]
    points = np.einsum("qk,tkd->tqd", _BARY, corners).reshape(-1, 2)
    dt, det = pmap.jacobian(pmap.inverse(points))
    n_tri = len(mesh.triangles)
    metric = dt.reshape(n_tri, 3, 2, 2)
    weights = (mesh.areas[:, None] / 3.0) / det.reshape(n_tri, 3)

    _, det_nodes = pmap.jacobian(pmap.inverse(mesh.nodes))
    return EnergyFunctional(mesh, plain.p, plain.grads, weights, metric, plain.mass / det_nodes)


def assemble_energy(mesh: TriMesh, p: float, u: np.ndarray) -> float:
    return EnergyFunctional.plain(mesh, p).value(u)


def pullback_energy(mesh: TriMesh, pmap: PerturbationMap, p: float, v: np.ndarray) -> float:
    return pullback_functional(mesh, pmap, p).value(v)


def _edge_values(mesh: TriMesh, u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a, b = mesh.boundary_edges.T
    return u[a], 0.5 * (u[a] + u[b]), u[b]


def boundary_power(mesh: TriMesh, p: float, u: np.ndarray, weights: np.ndarray) -> float:
    """∫ |u|^p dμ with Simpson's rule on every boundary edge."""
    u = mesh.check_nodal(u)
    ua, um, ub = _edge_values(mesh, u)
    return float(weights @ ((np.abs(ua) ** p + 4 * np.abs(um) ** p + np.abs(ub) ** p) / 6.0))


def boundary_power_gradient(mesh: TriMesh, p: float, u: np.ndarray, weights: np.ndarray) -> np.ndarray:
    ua, um, ub = _edge_values(mesh, u)
    da = p * np.abs(ua) ** (p - 2) * ua
    dm = p * np.abs(um) ** (p - 2) * um
    db = p * np.abs(ub) ** (p - 2) * ub
    a, b = mesh.boundary_edges.T
    ga = weights * (da + 2 * dm) / 6.0
    gb = weights * (db + 2 * dm) / 6.0
    return np.bincount(np.concatenate([a, b]), weights=np.concatenate([ga, gb]), minlength=mesh.n_nodes)


def boundary_lp_norm(mesh: TriMesh, p: float, u: np.ndarray, measure) -> float:
    """‖u‖_{L^p(∂Ω, μ)} for a DiscreteBoundaryMeasure ``measure``.

    Raises:
        MeasureError: If the measure does not match the mesh boundary.
    """
    measure.check_mesh(mesh)
    return boundary_power(mesh, p, u, measure.weights) ** (1.0 / p)


def boundary_mass_matrix(mesh: TriMesh, weights: np.ndarray) -> sp.csr_matrix:
    """Simpson (= consistent) boundary mass: weight/6 · [[2, 1], [1, 2]] per edge."""
    a, b = mesh.boundary_edges.T
    rows = np.concatenate([a, a, b, b])
    cols = np.concatenate([a, b, a, b])
    vals = np.concatenate([2 * weights, weights, weights, 2 * weights]) / 6.0
    n = mesh.n_nodes
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


class RayleighQuotient:
    """R(u) = Q(u) / ∫_{∂Ω} |u|^p dμ, homogeneous of degree 0."""

    def __init__(self, energy: EnergyFunctional, weights: np.ndarray):
        self.energy = energy
        self.weights = np.asarray(weights, dtype=float)

    @property
    def p(self) -> float:
        return self.energy.p

    def denominator(self, u: np.ndarray) -> float:
        return boundary_power(self.energy.mesh, self.p, u, self.weights)

    def value(self, u: np.ndarray) -> float:
        return self.energy.value(u) / self.denominator(u)

    def gradient(self, u: np.ndarray) -> np.ndarray:
        u = self.energy.mesh.check_nodal(u)
        denom = self.denominator(u)
        ratio = self.energy.value(u) / denom
        grad_n = boundary_power_gradient(self.energy.mesh, self.p, u, self.weights)
        return (self.energy.gradient(u) - ratio * grad_n) / denom
