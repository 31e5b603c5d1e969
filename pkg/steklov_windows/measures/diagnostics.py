"""Convergence diagnostics for boundary measures and windows, computed on ∂Ω.

Everything on ∂Ω_ε is carried to the base boundary first: T_ε maps the
perturbed boundary cycle monotonically onto the base one, and cumulative
quantities (length, window length) are interpolated between the images of
the perturbed vertices.

Code map:
    boundary_correspondence()          Base arclength of T_ε(perturbed boundary vertices)
    pulled_back_measure()              Discrete μ_ε on base edges, |∂Ω_ε| conserved
    pullback_window()                  Γ_ε as a window on ∂Ω with μ_ε weights
    pullback_boundary_values()         u_ε∘T_ε^{-1} at the base boundary nodes
    symmetric_difference_measure()     μ(A Δ B) from edge fractions
    best_reflection_difference()       min over {A, reflected A} of μ(A Δ B)
    small_value_mass()                 μ({0 < |u| ≤ 1/j})
    weak_measure_test()                |∫ f dν_ε − ∫ f dν*| and its three-term split
    arc_measure_errors()               max over 16 chart arcs |μ_ε(A) − μ*(A)|
    boundary_distance()                Relative L² distance of boundary traces
    write_measures_csv()               (k, eps, diagnostic, value)
"""

import csv
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import MapError, MeasureError
from ..geometry.domain import ChartFunction, OscillationSpec, cells_from_eps
from ..geometry.mesh import TriMesh
from ..quadrature import integrate_converged
from ..transforms.perturbation import PerturbationMap
from ..transforms.weight import limit_density
from ..windows.window import Window, edge_averages, reflect_window
from .boundary import DiscreteBoundaryMeasure, MeasureKind

N_ARCS = 16
MONOTONE_TOL = 1e-12


def boundary_correspondence(base_mesh: TriMesh, eps_mesh: TriMesh, pmap: PerturbationMap) -> np.ndarray:
    """Base-boundary arclength of the image of every perturbed boundary vertex, closed with |∂Ω|.

    Raises:
        MapError: If T_ε is not a diffeomorphism or the images run backwards.
    """
    images = pmap.forward(eps_mesh.nodes[eps_mesh.boundary_nodes])
    s = base_mesh.locate(images)
    total = base_mesh.total_boundary_length
    if s[0] > 0.5 * total:
        s[0] -= total
    s = np.append(s, total)
    if np.any(np.diff(s) < -MONOTONE_TOL * total):
        raise MapError("T_eps does not map the perturbed boundary cycle monotonically")
    return np.maximum.accumulate(s)


def _cumulative_at_base(base_mesh, knots, increments) -> np.ndarray:
    cumulative = np.concatenate([[0.0], np.cumsum(increments)])
    return np.interp(base_mesh.edge_arclength, knots, cumulative)


def pulled_back_measure(base_mesh: TriMesh, eps_mesh: TriMesh, pmap: PerturbationMap) -> DiscreteBoundaryMeasure:
    """μ_ε(e) = length of the preimage of base edge e on ∂Ω_ε."""
    knots = boundary_correspondence(base_mesh, eps_mesh, pmap)
    weights = np.diff(_cumulative_at_base(base_mesh, knots, eps_mesh.edge_lengths))
    return DiscreteBoundaryMeasure(MeasureKind.MU_EPS, np.maximum(weights, 0.0), pmap.eps)


def pullback_window(window: Window, eps_mesh: TriMesh, base_mesh: TriMesh, pmap: PerturbationMap) -> Window:
    """Edge fractions of T_ε(Γ_ε) on ∂Ω; its μ_ε measure equals |Γ_ε|.

    Raises:
        MeasureError: If the window does not live on the perturbed mesh boundary.
        MapError: If the boundary correspondence breaks down.
    """
    if len(window.fractions) != eps_mesh.n_boundary_edges:
        raise MeasureError("window does not live on the perturbed mesh boundary")
    knots = boundary_correspondence(base_mesh, eps_mesh, pmap)
    lengths = np.diff(_cumulative_at_base(base_mesh, knots, eps_mesh.edge_lengths))
    inside = np.diff(_cumulative_at_base(base_mesh, knots, window.fractions * eps_mesh.edge_lengths))
    fractions = np.divide(inside, lengths, out=np.zeros_like(lengths), where=lengths > 0)
    return Window(np.clip(fractions, 0.0, 1.0), np.maximum(lengths, 0.0), window.target)


def pullback_boundary_values(
    base_mesh: TriMesh, eps_mesh: TriMesh, pmap: PerturbationMap, u_eps: np.ndarray
) -> np.ndarray:
    """Nodal vector on the base mesh carrying u_ε∘T_ε^{-1} on its boundary nodes (zero inside)."""
    u_eps = eps_mesh.check_nodal(u_eps)
    knots = boundary_correspondence(base_mesh, eps_mesh, pmap)
    values = u_eps[eps_mesh.boundary_nodes]
    values = np.append(values, values[0])
    v = np.zeros(base_mesh.n_nodes)
    v[base_mesh.boundary_nodes] = np.interp(base_mesh.edge_arclength[:-1], knots, values)
    return v


def _check_pair(a: Window, b: Window, measure) -> np.ndarray:
    weights = a.weights if measure is None else measure.weights
    if a.fractions.shape != b.fractions.shape or a.fractions.shape != weights.shape:
        raise MeasureError("windows live on different boundary discretizations")
    return weights


def symmetric_difference_measure(a: Window, b: Window, measure=None) -> float:
    """μ(A Δ B) = Σ |frac_A − frac_B| · weight; μ defaults to A's own weights."""
    weights = _check_pair(a, b, measure)
    return float(np.abs(a.fractions - b.fractions) @ weights)


def best_reflection_difference(a: Window, b: Window, mesh: TriMesh, measure=None, axis: float = 0.5) -> float:
    return min(
        symmetric_difference_measure(a, b, measure),
        symmetric_difference_measure(reflect_window(a, mesh, axis), b, measure),
    )


def small_value_mass(mesh: TriMesh, pair, j: int, measure) -> float:
    """μ of the boundary edges whose average |u| lies in (0, 1/j]."""
    if j < 1:
        raise MeasureError(f"level index must be >= 1, got {j}")
    measure.check_mesh(mesh)
    avg = edge_averages(mesh, mesh.check_nodal(pair.u), 1.0)
    small = (avg > 0) & (avg <= 1.0 / j)
    return float(measure.weights[small].sum())


@dataclass(frozen=True)
class WeakMeasureResult:
    """|∫ f dν_ε − ∫ f dν*| = |A + B + C|.

    Attributes:
        A: Window mismatch, Σ (χ_ε − χ*) f(T_ε^{-1} x) μ_ε.
        B: Test-function transport, Σ χ* (f(T_ε^{-1} x) − f(x)) μ_ε.
        C: Measure mismatch, Σ χ* f(x) (μ_ε − μ*).
    """

    value: float
    A: float
    B: float
    C: float


def weak_measure_test(
    f: Callable[[np.ndarray], np.ndarray],
    nu_eps: Window,
    nu_star: Window,
    base_mesh: TriMesh,
    pmap: PerturbationMap,
) -> WeakMeasureResult:
    """Compare ν_ε = χ_{Γ_ε} dS (pulled back) with ν* = χ_{Γ*} m dS on base edge midpoints.

    ``nu_eps`` carries μ_ε edge weights and ``nu_star`` μ* edge weights.
    """
    if nu_eps.fractions.shape != nu_star.fractions.shape or len(nu_eps.fractions) != base_mesh.n_boundary_edges:
        raise MeasureError("windows live on different boundary discretizations")
    mid = base_mesh.edge_midpoints
    f_mid = np.asarray(f(mid), dtype=float)
    f_pre = np.asarray(f(pmap.inverse(mid)), dtype=float)
    chi_eps, chi_star = nu_eps.fractions, nu_star.fractions
    w_eps, w_star = nu_eps.weights, nu_star.weights

    a = float(((chi_eps - chi_star) * f_pre) @ w_eps)
    b = float((chi_star * (f_pre - f_mid)) @ w_eps)
    c = float((chi_star * f_mid) @ (w_eps - w_star))
    return WeakMeasureResult(value=abs(a + b + c), A=a, B=b, C=c)


def arc_measure_errors(phi: ChartFunction, osc: OscillationSpec, eps: float, n_arcs: int = N_ARCS) -> float:
    """max_j |μ_ε(A_j) − μ*(A_j)| over the chart arcs A_j = {x' ∈ [j/n, (j+1)/n]}.

    For a > 1 the limit measure is dS.
    """
    k = cells_from_eps(eps)
    scale = eps ** (osc.a - 1.0)
    panels = max(4, int(np.ceil(16 * k / n_arcs)))

    def perturbed(x):
        return np.sqrt(1.0 + (phi.derivative(x) + scale * osc.fprime(x / eps)) ** 2)

    def limit(x):
        dphi = phi.derivative(x)
        return limit_density(dphi, osc) * np.sqrt(1.0 + dphi**2)

    errors = []
    for j in range(n_arcs):
        lo, hi = j / n_arcs, (j + 1) / n_arcs
        errors.append(abs(integrate_converged(perturbed, lo, hi, panels) - integrate_converged(limit, lo, hi, 4)))
    return float(max(errors))


def boundary_distance(mesh: TriMesh, v: np.ndarray, u: np.ndarray, measure) -> float:
    """‖v − u‖ / ‖u‖ in L²(∂Ω, μ), Simpson per edge."""
    measure.check_mesh(mesh)
    diff = edge_averages(mesh, mesh.check_nodal(v) - mesh.check_nodal(u), 2.0)
    ref = edge_averages(mesh, u, 2.0)
    return float(np.sqrt((diff @ measure.weights) / (ref @ measure.weights)))


@dataclass(frozen=True)
class MeasureRow:
    k: int
    eps: float
    diagnostic: str
    value: float


def write_measures_csv(rows: Sequence[MeasureRow], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["k", "eps", "diagnostic", "value"])
        for row in rows:
            writer.writerow([row.k, repr(row.eps), row.diagnostic, repr(row.value)])
    return path
