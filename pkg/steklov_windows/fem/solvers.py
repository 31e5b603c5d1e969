"""Minimal trace quotients λ(Γ) = inf Q(u) / ∫_{∂Ω}|u|^p dμ with u = 0 on the window Γ.

Code map:
    SolverConfig              Tolerances, iteration caps, seed, line-search constants
    TraceEigenpair            λ, nodal u (boundary-normalized), diagnostics
    pinned_nodes()            Majority-length rule for Dirichlet nodes of a window
    solve_p2()                Shifted inverse iteration for A u = λ B u
    solve_p_general()         Preconditioned projected descent for p > 2
    write_eigenpair()         CSV (node id, x, y, u) plus JSON summary
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import splu

from ..errors import ConfigError, InfeasibleError, SolverError
from ..geometry.mesh import TriMesh
from .energy import EnergyFunctional, RayleighQuotient, boundary_mass_matrix, boundary_power

BOUNDARY_ID = {"surface": "Surface", "mu_star": "WeightedMu*", "mu_eps": "PulledBackMuEps"}


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rules and line-search constants shared by both solvers."""

    tol_lambda: float = 1e-8
    tol_residual: float = 1e-8
    max_iter: int = 500
    seed: int = 0
    shift: float = 0.0
    armijo: float = 1e-4
    max_halvings: int = 50

    def __post_init__(self):
        for key in ("tol_lambda", "tol_residual", "armijo"):
            if not getattr(self, key) > 0:
                raise ConfigError(key, "must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter", "must be at least 1")


@dataclass(frozen=True, eq=False)
class TraceEigenpair:
    """Minimizer of the trace quotient, normalized so that ∫|u|^p dμ = 1."""

    lam: float
    u: np.ndarray
    p: float
    measure_kind: str
    iterations: int
    residual: float
    pinned: np.ndarray = field(repr=False)

    @property
    def boundary_measure_id(self) -> str:
        return BOUNDARY_ID.get(self.measure_kind, self.measure_kind)


def pinned_nodes(mesh: TriMesh, fractions: np.ndarray | None) -> np.ndarray:
    """Boolean node mask of Dirichlet nodes for an edge-fraction window.

    A boundary node is pinned when at least half of the length of its two
    boundary edges lies in the window.
    """
    pinned = np.zeros(mesh.n_nodes, dtype=bool)
    if fractions is None:
        return pinned
    fractions = np.asarray(fractions, dtype=float)
    lengths = mesh.edge_lengths
    inside = fractions * lengths
    inside_at_node = inside + np.roll(inside, 1)
    total_at_node = lengths + np.roll(lengths, 1)
    majority = (inside_at_node > 0) & (inside_at_node >= 0.5 * total_at_node * (1 - 1e-12))
    pinned[mesh.boundary_nodes[majority]] = True
    return pinned


def _window_fractions(window) -> np.ndarray | None:
    return None if window is None else window.fractions


def _boundary_sign(mesh: TriMesh, u: np.ndarray, weights: np.ndarray) -> float:
    a, b = mesh.boundary_edges.T
    return 1.0 if weights @ (u[a] + u[b]) >= 0 else -1.0


def _initial_vector(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return 1.0 + 0.01 * rng.standard_normal(n)


def solve_p2(
    mesh: TriMesh,
    window,
    measure,
    config: SolverConfig | None = None,
    energy: EnergyFunctional | None = None,
    initial: np.ndarray | None = None,
) -> TraceEigenpair:
    """Smallest eigenpair of (K + M) u = λ B u with window nodes eliminated.

    Args:
        mesh: Mesh of the domain.
        window: Window with ``fractions`` per boundary edge, or None.
        measure: DiscreteBoundaryMeasure for the denominator.
        config: Solver settings.
        energy: Quadratic energy (defaults to the plain Q with p = 2).
        initial: Optional starting nodal vector.

    Returns:
        The eigenpair with ∫ u² dμ = 1 and positive boundary mean.

    Raises:
        InfeasibleError: If no boundary mass survives the window.
        SolverError: If inverse iteration does not converge.
    """
    config = config or SolverConfig()
    measure.check_mesh(mesh)
    energy = (energy or EnergyFunctional.plain(mesh, 2.0)).with_exponent(2.0)
    pinned = pinned_nodes(mesh, _window_fractions(window))
    free = np.flatnonzero(~pinned)

    b_full = boundary_mass_matrix(mesh, measure.weights)
    bf = b_full[free][:, free].tocsr()
    if bf.nnz == 0 or not np.any(bf.diagonal() > 0):
        raise InfeasibleError("window covers the whole boundary measure")
    af = energy.matrix()[free][:, free].tocsc()
    lu = splu((af - config.shift * bf).tocsc() if config.shift else af)

    x = _initial_vector(mesh.n_nodes, config.seed) if initial is None else np.asarray(initial, dtype=float)
    x = x[free]
    if not np.any(bf @ x):
        x = _initial_vector(mesh.n_nodes, config.seed)[free]

    lam_prev = np.inf
    for iteration in range(1, config.max_iter + 1):
        y = lu.solve(bf @ x)
        by = bf @ y
        norm2 = float(y @ by)
        if not norm2 > 0:
            raise SolverError("iterate lost its boundary trace", iteration)
        y /= np.sqrt(norm2)
        by /= np.sqrt(norm2)
        ay = af @ y
        lam = float(y @ ay)
        residual = float(np.linalg.norm(ay - lam * by) / np.linalg.norm(ay))
        if abs(lam - lam_prev) <= config.tol_lambda * abs(lam) and residual <= config.tol_residual:
            break
        x, lam_prev = y, lam
    else:
        raise SolverError(f"inverse iteration did not reach tol_lambda={config.tol_lambda}", config.max_iter)

    u = np.zeros(mesh.n_nodes)
    u[free] = y
    u *= _boundary_sign(mesh, u, measure.weights)
    u /= np.sqrt(boundary_power(mesh, 2.0, u, measure.weights))
    return TraceEigenpair(
        lam=energy.value(u),
        u=u,
        p=2.0,
        measure_kind=measure.kind.value,
        iterations=iteration,
        residual=residual,
        pinned=pinned,
    )


def solve_p_general(
    mesh: TriMesh,
    window,
    measure,
    p: float,
    config: SolverConfig | None = None,
    energy: EnergyFunctional | None = None,
    initial: np.ndarray | None = None,
) -> TraceEigenpair:
    """Minimize Q(u) / ∫|u|^p dμ over nodal vectors vanishing on the window.

    Starts from the p = 2 minimizer and takes descent steps along the
    W^{1,2}-gradient (the Euclidean gradient preconditioned by the p = 2 matrix)
    with Armijo backtracking, renormalizing to the unit boundary L^p sphere after
    every accepted step. λ is non-increasing across iterations.

    Raises:
        ConfigError: If p < 2.
        InfeasibleError: If no boundary mass survives the window.
        SolverError: If the relative λ change stays above tol_lambda.
    """
    if p < 2:
        raise ConfigError("p", f"exponent must be >= 2, got {p}")
    config = config or SolverConfig()
    energy = (energy or EnergyFunctional.plain(mesh, p)).with_exponent(p)
    start = solve_p2(mesh, window, measure, config, energy=energy, initial=initial)
    free = np.flatnonzero(~start.pinned)
    quotient = RayleighQuotient(energy, measure.weights)
    precond = splu(energy.with_exponent(2.0).matrix()[free][:, free].tocsc())

    u = start.u / quotient.denominator(start.u) ** (1.0 / p)
    lam = quotient.value(u)
    grad = quotient.gradient(u)
    converged = False
    iteration = 0
    for iteration in range(1, config.max_iter + 1):
        direction = np.zeros_like(u)
        direction[free] = -precond.solve(grad[free])
        slope = float(grad[free] @ direction[free])
        if slope >= 0:
            converged = True
            break
        step = 1.0
        for _ in range(config.max_halvings):
            candidate = u + step * direction
            lam_candidate = quotient.value(candidate)
            if lam_candidate <= lam + config.armijo * step * slope:
                break
            step *= 0.5
        else:
            converged = True
            break
        u = candidate / quotient.denominator(candidate) ** (1.0 / p)
        change = (lam - lam_candidate) / lam
        lam = lam_candidate
        grad = quotient.gradient(u)
        if change < config.tol_lambda:
            converged = True
            break
    if not converged:
        raise SolverError(f"descent did not reach tol_lambda={config.tol_lambda}", iteration)

    u *= _boundary_sign(mesh, u, measure.weights)
    flux = energy.gradient(u)[free]
    residual = float(np.linalg.norm(grad[free]) / max(np.linalg.norm(flux), np.finfo(float).tiny))
    return TraceEigenpair(
        lam=energy.value(u),
        u=u,
        p=float(p),
        measure_kind=measure.kind.value,
        iterations=start.iterations + iteration,
        residual=residual,
        pinned=start.pinned,
    )


def write_eigenpair(mesh: TriMesh, pair: TraceEigenpair, path: Path, alpha: float | None = None) -> Path:
    """Write ``path`` (node id, x, y, u) and a ``.json`` summary beside it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["node", "x", "y", "u"])
        for i, ((x, y), value) in enumerate(zip(mesh.nodes, pair.u)):
            writer.writerow([i, repr(float(x)), repr(float(y)), repr(float(value))])

    summary = {
        "lambda": pair.lam,
        "p": pair.p,
        "alpha": alpha,
        "measure": pair.boundary_measure_id,
        "iterations": pair.iterations,
        "residual": pair.residual,
    }
    with open(path.with_suffix(".json"), "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2)
    return path
