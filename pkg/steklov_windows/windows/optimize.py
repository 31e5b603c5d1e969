"""Alternating window / eigenfunction optimization for λ(α) and λ*(α).

Code map:
    OptimizationTrace          Per-iteration λ, window measure, changed edges; best pair
    optimize_window()          Solve, bathtub, accept or restart from a rotated arc
    solve_limit_problem()      Same scheme with the weighted measure dμ* = m dS
    contiguous_arc_oracle()    λ of every contiguous arc of measure α·total
"""

from dataclasses import dataclass, field

import numpy as np

from ..fem.energy import EnergyFunctional
from ..fem.solvers import SolverConfig, TraceEigenpair, solve_p2, solve_p_general
from ..geometry.mesh import TriMesh
from .window import Window, bathtub_update, initial_arc

DEFAULT_RESTARTS = 3
MAX_ROUNDS = 200


@dataclass
class OptimizationTrace:
    """History of one optimize_window run."""

    lambdas: list[float] = field(default_factory=list)
    measures: list[float] = field(default_factory=list)
    changed: list[int] = field(default_factory=list)
    restarts: int = 0
    best_lambda: float = np.inf
    best_window: Window | None = None

    def record(self, lam: float, window: Window, changed: int) -> None:
        self.lambdas.append(lam)
        self.measures.append(window.measure)
        self.changed.append(changed)
        if lam < self.best_lambda:
            self.best_lambda = lam
            self.best_window = window

    @property
    def iterations(self) -> int:
        return len(self.lambdas)

    @property
    def best_history(self) -> np.ndarray:
        return np.minimum.accumulate(np.asarray(self.lambdas))


def _solve(mesh, window, measure, p, config, energy, initial=None) -> TraceEigenpair:
    if p == 2:
        return solve_p2(mesh, window, measure, config, energy=energy, initial=initial)
    return solve_p_general(mesh, window, measure, p, config, energy=energy, initial=initial)


def _scan_starts(n_edges: int, arc_scan: int, start: int) -> np.ndarray:
    count = min(arc_scan, n_edges)
    offsets = np.unique(np.floor(np.arange(count) * n_edges / count).astype(int))
    return (start + offsets) % n_edges


def optimize_window(
    mesh: TriMesh,
    alpha: float,
    p: float,
    measure,
    config: SolverConfig | None = None,
    energy: EnergyFunctional | None = None,
    restarts: int = DEFAULT_RESTARTS,
    arc_scan: int = 0,
    initial: np.ndarray | None = None,
    max_rounds: int = MAX_ROUNDS,
) -> tuple[Window, TraceEigenpair, OptimizationTrace]:
    """Approximate λ(α) = min over windows of measure α·μ(∂Ω) of λ(Γ).

    Starts from the contiguous arc at arclength 0 (or the best of ``arc_scan``
    evenly spaced arcs) and alternates a solve with a bathtub update. A step that
    raises λ is rejected; the search then restarts from the initial arc rotated
    by one more edge, at most ``restarts`` times. Stops when the window is stable
    or λ improves by less than ``tol_lambda`` relative.

    Args:
        mesh: Mesh of the domain.
        alpha: Window fraction in (0, 1).
        p: Exponent, at least 2.
        measure: DiscreteBoundaryMeasure for the constraint and the denominator.
        config: Solver settings.
        energy: Energy functional (plain Q by default).
        restarts: Maximal number of rotated-arc restarts.
        arc_scan: Number of contiguous arcs to evaluate before the first step.
        initial: Starting nodal vector for the first solve.
        max_rounds: Cap on accepted bathtub steps.

    Returns:
        The best window, its eigenpair and the trace.

    Raises:
        ConfigError: If alpha is outside (0, 1).
        InfeasibleError: If a window leaves no boundary mass.
        SolverError: If a solve does not converge.
    """
    config = config or SolverConfig()
    n_edges = mesh.n_boundary_edges
    trace = OptimizationTrace()

    start = 0
    window = initial_arc(measure, alpha, start)
    if arc_scan > 0:
        scanned = []
        for s in _scan_starts(n_edges, arc_scan, 0):
            arc = initial_arc(measure, alpha, int(s))
            scanned.append((_solve(mesh, arc, measure, p, config, energy).lam, int(s), arc))
        _, start, window = min(scanned, key=lambda item: (item[0], item[1]))

    current = _solve(mesh, window, measure, p, config, energy, initial)
    trace.record(current.lam, window, 0)
    best = (window, current)

    for _ in range(max_rounds):
        candidate = bathtub_update(mesh, current, alpha, measure)
        changed = window.changed_edges(candidate)
        if changed == 0:
            break
        pair = _solve(mesh, candidate, measure, p, config, energy, current.u)
        trace.record(pair.lam, candidate, changed)
        if pair.lam < best[1].lam:
            best = (candidate, pair)
        if pair.lam <= current.lam * (1.0 + config.tol_lambda):
            improvement = (current.lam - pair.lam) / current.lam
            window, current = candidate, pair
            if improvement < config.tol_lambda:
                break
            continue

        if trace.restarts >= restarts:
            break
        trace.restarts += 1
        window = initial_arc(measure, alpha, (start + trace.restarts) % n_edges)
        current = _solve(mesh, window, measure, p, config, energy)
        trace.record(current.lam, window, window.changed_edges(candidate))
        if current.lam < best[1].lam:
            best = (window, current)

    return best[0], best[1], trace


def solve_limit_problem(
    mesh: TriMesh,
    weight,
    alpha: float,
    p: float,
    config: SolverConfig | None = None,
    **options,
) -> tuple[Window, TraceEigenpair]:
    """λ*(α) on the base mesh with ``weight`` = μ* in the constraint and the denominator."""
    window, pair, _ = optimize_window(mesh, alpha, p, weight, config, **options)
    return window, pair


@dataclass(frozen=True, eq=False)
class ArcOracle:
    lam: float
    start: int
    lambdas: np.ndarray


def contiguous_arc_oracle(
    mesh: TriMesh,
    alpha: float,
    p: float,
    measure,
    config: SolverConfig | None = None,
    energy: EnergyFunctional | None = None,
) -> ArcOracle:
    """Minimum of λ(Γ) over the contiguous arcs starting at every boundary edge."""
    config = config or SolverConfig()
    lambdas = np.array(
        [
            _solve(mesh, initial_arc(measure, alpha, start), measure, p, config, energy).lam
            for start in range(mesh.n_boundary_edges)
        ]
    )
    best = int(np.argmin(lambdas))
    return ArcOracle(lam=float(lambdas[best]), start=best, lambdas=lambdas)
