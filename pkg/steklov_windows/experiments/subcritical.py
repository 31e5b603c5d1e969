"""Explicit test function bounding λ_ε(α) from above when a < 1.

φ vanishes within δ of Γ_{0,ε} (the left wall plus the chart over
x' ≤ chart_fraction), equals 1 beyond 2δ and blends linearly in the
distance in between. Its quotient Q_ε(φ) / ∫|φ|^p dS is an upper bound for
λ_ε(α) as soon as {φ = 0} carries at least α|∂Ω_ε|, and the oscillating chart
part of {φ = 1} makes the denominator grow like ε^{a−1}.

Code map:
    SubcriticalWitness      δ, Γ_{0,ε} and Γ_{1,ε} edge masks, nodal φ, constants
    build_witness()         Construct φ on a mesh of Ω_ε and check admissibility
    subcritical_bound()     Q_ε(φ) / ∫_{∂Ω_ε} |φ|^p dS, optionally checked against λ_ε(α) and Ĉ ε^{1−a}
    check_subcritical_bound()  λ_ε(α) ≤ bound ≤ Ĉ ε^{1−a}
"""

from dataclasses import dataclass, field

import numpy as np
import shapely

from ..errors import ConfigError, WitnessError
from ..fem.energy import EnergyFunctional, boundary_power, shape_gradients
from ..geometry.domain import OscillationSpec
from ..geometry.mesh import TriMesh

DEFAULT_DELTA = 0.2
CHART_MARGIN = 0.05
BOUND_RTOL = 1e-10
_WALL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SubcriticalWitness:
    """Admissible test function for the subcritical upper bound.

    Attributes:
        delta: Width δ of the zero region U_δ.
        chart_fraction: Γ_0 covers the chart over x' ∈ [0, chart_fraction].
        phi: Nodal values of φ on the Ω_ε mesh.
        gamma0: Boundary edges of Γ_{0,ε}.
        zero_edges: Boundary edges with φ = 0 at both ends.
        gamma1: Chart edges with φ = 1 at both ends.
        gradient_constant: C(δ) = δ^{-p}, the bound on |∇φ|^p.
        grad_max: Largest |∇φ_T|^p over the mesh triangles.
        c_hat: Ĉ = 2 (C(δ) + 1) |Ω_ε| / (mean_grad / 2).
    """

    delta: float
    chart_fraction: float
    phi: np.ndarray = field(repr=False)
    gamma0: np.ndarray = field(repr=False)
    zero_edges: np.ndarray = field(repr=False)
    gamma1: np.ndarray = field(repr=False)
    gradient_constant: float
    grad_max: float
    c_hat: float


def _gamma0_edges(mesh: TriMesh, chart_fraction: float) -> np.ndarray:
    a, b = mesh.boundary_edges.T
    on_wall = (np.abs(mesh.nodes[a, 0]) <= _WALL_TOL) & (np.abs(mesh.nodes[b, 0]) <= _WALL_TOL)
    on_chart = mesh.boundary_chart & (mesh.edge_midpoints[:, 0] <= chart_fraction)
    return (on_wall & ~mesh.boundary_chart) | on_chart


def build_witness(
    mesh: TriMesh,
    osc: OscillationSpec,
    alpha: float,
    delta: float = DEFAULT_DELTA,
    chart_fraction: float | None = None,
    p: float = 2.0,
) -> SubcriticalWitness:
    """Build φ on a mesh of the square Ω_ε.

    Raises:
        ConfigError: If δ is not positive or the mesh has no chart.
        WitnessError: If {φ = 0} carries less than α|∂Ω_ε| or Γ_{1,ε} is empty.
    """
    if not delta > 0:
        raise ConfigError("delta", f"must be positive, got {delta}")
    if not mesh.boundary_chart.any():
        raise ConfigError("domain", "the subcritical witness needs a charted square")
    chart_fraction = alpha + CHART_MARGIN if chart_fraction is None else chart_fraction

    gamma0 = _gamma0_edges(mesh, chart_fraction)
    segments = mesh.nodes[mesh.boundary_edges[gamma0]]
    distance = shapely.distance(shapely.points(mesh.nodes), shapely.multilinestrings(shapely.linestrings(segments)))
    phi = np.clip((distance - delta) / delta, 0.0, 1.0)

    a, b = mesh.boundary_edges.T
    zero_edges = (phi[a] == 0.0) & (phi[b] == 0.0)
    gamma1 = mesh.boundary_chart & (phi[a] == 1.0) & (phi[b] == 1.0)
    zero_length = float(mesh.edge_lengths[zero_edges].sum())
    if zero_length < alpha * mesh.total_boundary_length:
        raise WitnessError(
            f"{{phi = 0}} has length {zero_length:.4g} < alpha |dOmega_eps| = "
            f"{alpha * mesh.total_boundary_length:.4g}"
        )
    if not gamma1.any():
        raise WitnessError("no chart edge lies outside the 2 delta neighbourhood of Gamma_0")

    grads = np.einsum("tij,ti->tj", shape_gradients(mesh), phi[mesh.triangles])
    grad_max = float(np.max(np.linalg.norm(grads, axis=1) ** p))
    constant = delta**-p
    c_hat = 2.0 * (constant + 1.0) * mesh.area / (osc.mean_grad / 2.0) if osc.mean_grad > 0 else np.inf
    return SubcriticalWitness(
        delta=delta,
        chart_fraction=chart_fraction,
        phi=phi,
        gamma0=gamma0,
        zero_edges=zero_edges,
        gamma1=gamma1,
        gradient_constant=constant,
        grad_max=grad_max,
        c_hat=float(c_hat),
    )


def check_subcritical_bound(
    bound: float,
    witness: SubcriticalWitness,
    lam: float | None = None,
    eps: float | None = None,
    a: float | None = None,
) -> None:
    """Check λ_ε(α) ≤ bound when ``lam`` is given and bound ≤ Ĉ ε^{1−a} when ``eps`` and ``a`` are.

    Raises:
        WitnessError: If either inequality fails beyond ``BOUND_RTOL``.
    """
    if lam is not None and lam > bound * (1.0 + BOUND_RTOL):
        raise WitnessError(f"lambda_eps = {lam:.8g} exceeds the witness bound {bound:.8g}")
    if eps is not None and a is not None:
        limit = witness.c_hat * eps ** (1.0 - a)
        if bound > limit * (1.0 + BOUND_RTOL):
            raise WitnessError(f"bound {bound:.8g} exceeds C_hat eps^(1-a) = {limit:.8g}")


def subcritical_bound(
    mesh: TriMesh,
    witness: SubcriticalWitness,
    p: float = 2.0,
    lam: float | None = None,
    eps: float | None = None,
    a: float | None = None,
) -> float:
    """Q_ε(φ) / ∫_{∂Ω_ε} |φ|^p dS for the witness φ.

    With ``lam`` the computed λ_ε(α) must not exceed the bound; with ``eps``
    and ``a`` the bound must not exceed Ĉ ε^{1−a}.

    Raises:
        WitnessError: If a requested inequality fails.
    """
    numerator = EnergyFunctional.plain(mesh, p).value(witness.phi)
    bound = numerator / boundary_power(mesh, p, witness.phi, mesh.edge_lengths)
    check_subcritical_bound(bound, witness, lam, eps, a)
    return bound
