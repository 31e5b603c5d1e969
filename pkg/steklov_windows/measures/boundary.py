"""Discrete boundary measures on the edges of a mesh boundary cycle.

Code map:
    MeasureKind                    Surface, MuEps, MuStar, NuEps, NuStar
    DiscreteBoundaryMeasure        Non-negative per-edge weights
    surface_measure()              dS
    mu_star_measure()              m dS on the chart, dS elsewhere
    mu_eps_measure()               J_τT_ε^{-1} dS by per-edge quadrature
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..errors import ConfigError, MeasureError
from ..geometry.domain import OscillationSpec
from ..geometry.mesh import TriMesh
from ..transforms.perturbation import PerturbationMap, tangential_jacobian_inverse
from ..transforms.weight import homogenized_weights

_EDGE_GAUSS = 2
_PANELS_PER_PERIOD = 16


class MeasureKind(str, Enum):
    SURFACE = "surface"
    MU_EPS = "mu_eps"
    MU_STAR = "mu_star"
    NU_EPS = "nu_eps"
    NU_STAR = "nu_star"


_RESTRICTED = {MeasureKind.MU_EPS: MeasureKind.NU_EPS, MeasureKind.MU_STAR: MeasureKind.NU_STAR}


@dataclass(frozen=True, eq=False)
class DiscreteBoundaryMeasure:
    """Per-edge weights on a boundary cycle; ``weights[i]`` is the measure of edge ``i``."""

    kind: MeasureKind
    weights: np.ndarray
    eps: float | None = None

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 1 or not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise MeasureError(f"{self.kind.value} measure needs finite non-negative edge weights")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "kind", MeasureKind(self.kind))

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return len(self.weights)

    def check_mesh(self, mesh: TriMesh) -> None:
        if len(self.weights) != mesh.n_boundary_edges:
            raise MeasureError(f"measure has {len(self.weights)} edges, mesh boundary has {mesh.n_boundary_edges}")

    def restrict(self, fractions: np.ndarray) -> "DiscreteBoundaryMeasure":
        """ν = χ_Γ μ for an edge-fraction indicator of Γ."""
        fractions = np.asarray(fractions, dtype=float)
        if fractions.shape != self.weights.shape:
            raise MeasureError("window and measure live on different boundary discretizations")
        kind = _RESTRICTED.get(self.kind, self.kind)
        return DiscreteBoundaryMeasure(kind, fractions * self.weights, self.eps)


def surface_measure(mesh: TriMesh) -> DiscreteBoundaryMeasure:
    return DiscreteBoundaryMeasure(MeasureKind.SURFACE, mesh.edge_lengths.copy())


def _chart_gauss(mesh: TriMesh) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """x' at Gauss points of every chart edge, weights, and the chart edge indices."""
    idx = np.flatnonzero(mesh.boundary_chart)
    a, b = mesh.boundary_edges[idx].T
    xa, xb = mesh.nodes[a, 0], mesh.nodes[b, 0]
    xi, wi = leggauss(_EDGE_GAUSS)
    t = 0.5 * (xi + 1.0)
    xq = xa[:, None] + (xb - xa)[:, None] * t[None, :]
    return xq, 0.5 * wi, idx


def mu_star_measure(mesh: TriMesh, osc: OscillationSpec) -> DiscreteBoundaryMeasure:
    """dμ* = m dS on chart edges (m at the local chart slope), dS elsewhere."""
    domain = mesh.domain
    if domain is None or domain.phi is None:
        raise ConfigError("domain", "mu* needs a charted domain")
    weights = mesh.edge_lengths.copy()
    xq, wq, idx = _chart_gauss(mesh)
    if idx.size:
        m = homogenized_weights(domain.phi.derivative(xq), osc)
        weights[idx] = mesh.edge_lengths[idx] * (m @ wq)
    return DiscreteBoundaryMeasure(MeasureKind.MU_STAR, weights)


def mu_eps_measure(mesh: TriMesh, pmap: PerturbationMap) -> DiscreteBoundaryMeasure:
    """dμ_ε = J_τT_ε^{-1} dS on the base boundary.

    Chart edges integrate the closed-form density in x' with enough panels per
    period; the remaining edges use |DT_ε^{-1} τ| at the preimages of two Gauss
    points, which is 1 wherever T_ε is the identity.
    """
    weights = mesh.edge_lengths.copy()
    if pmap.is_identity:
        return DiscreteBoundaryMeasure(MeasureKind.MU_EPS, weights, pmap.eps)

    chart = np.flatnonzero(mesh.boundary_chart)
    if chart.size:
        a, b = mesh.boundary_edges[chart].T
        xa, xb = mesh.nodes[a, 0], mesh.nodes[b, 0]
        span = np.abs(xb - xa)
        panels = np.maximum(2, np.ceil(_PANELS_PER_PERIOD * span / pmap.eps)).astype(int)
        xi, wi = leggauss(4)
        for count in np.unique(panels):
            sel = np.flatnonzero(panels == count)
            edges = np.linspace(0.0, 1.0, count + 1)
            t = ((edges[:-1, None] + edges[1:, None]) / 2 + np.diff(edges)[:, None] / 2 * xi[None, :]).ravel()
            w = (np.diff(edges)[:, None] / 2 * wi[None, :]).ravel()
            xq = xa[sel, None] + (xb - xa)[sel, None] * t[None, :]
            density = tangential_jacobian_inverse(pmap, xq)
            weights[chart[sel]] = mesh.edge_lengths[chart[sel]] * (density @ w)

    other = np.flatnonzero(~mesh.boundary_chart)
    if other.size:
        a, b = mesh.boundary_edges[other].T
        pa, pb = mesh.nodes[a], mesh.nodes[b]
        tau = (pb - pa) / mesh.edge_lengths[other, None]
        xi, wi = leggauss(_EDGE_GAUSS)
        density = np.zeros(other.size)
        for x, w in zip(0.5 * (xi + 1.0), 0.5 * wi):
            pre = pmap.inverse(pa + x * (pb - pa))
            dt, _ = pmap.jacobian(pre)
            density += w * np.linalg.norm(np.linalg.solve(dt, tau[:, :, None])[:, :, 0], axis=1)
        weights[other] = mesh.edge_lengths[other] * density
    return DiscreteBoundaryMeasure(MeasureKind.MU_EPS, weights, pmap.eps)
