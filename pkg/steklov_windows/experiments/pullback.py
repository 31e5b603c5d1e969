"""The two discretizations of λ_ε(α): directly on Ω_ε and pulled back to Ω.

Code map:
    solve_pullback()          Optimal window for Q̃_ε on a base mesh with the μ_ε constraint
    PullbackComparison        Both eigenpairs and their relative gap
    compare_pullback()        |λ_direct − λ_pullback| / λ_direct
    run_pullback_check()      Build both meshes, solve both problems, compare
"""

from dataclasses import dataclass

from ..fem.energy import pullback_functional
from ..fem.solvers import SolverConfig, TraceEigenpair
from ..geometry.domain import ChartedDomain, OscillationSpec, build_perturbed_boundary
from ..geometry.mesh import generate_mesh
from ..measures.boundary import mu_eps_measure, surface_measure
from ..transforms.perturbation import PerturbationMap
from ..windows.optimize import OptimizationTrace, optimize_window
from ..windows.window import Window


def solve_pullback(
    base_mesh,
    pmap: PerturbationMap,
    alpha: float,
    p: float,
    config: SolverConfig | None = None,
    **options,
) -> tuple[Window, TraceEigenpair, OptimizationTrace]:
    """Minimize Q̃_ε(v) / ∫|v|^p dμ_ε over windows with μ_ε(Γ) = α μ_ε(∂Ω).

    Raises:
        MapError: If T_ε is not a diffeomorphism.
    """
    pmap.ensure_diffeomorphic()
    energy = pullback_functional(base_mesh, pmap, p)
    measure = mu_eps_measure(base_mesh, pmap)
    return optimize_window(base_mesh, alpha, p, measure, config, energy=energy, **options)


@dataclass(frozen=True, eq=False)
class PullbackComparison:
    direct: TraceEigenpair
    pullback: TraceEigenpair
    gap: float


def compare_pullback(direct: TraceEigenpair, pullback: TraceEigenpair) -> float:
    return abs(direct.lam - pullback.lam) / direct.lam


def run_pullback_check(
    domain: ChartedDomain,
    osc: OscillationSpec,
    eps: float,
    alpha: float,
    p: float = 2.0,
    h: float | None = None,
    config: SolverConfig | None = None,
    **options,
) -> PullbackComparison:
    """Solve λ_ε(α) on a mesh of Ω_ε and on a mesh of Ω with the same size h (default ε/8)."""
    h = eps / 8 if h is None else h
    base = domain.base or domain
    eps_mesh = generate_mesh(build_perturbed_boundary(base, osc, eps), h)
    _, direct, _ = optimize_window(eps_mesh, alpha, p, surface_measure(eps_mesh), config, **options)

    base_mesh = generate_mesh(base, h)
    _, pulled, _ = solve_pullback(base_mesh, PerturbationMap(base, osc, eps), alpha, p, config, **options)
    return PullbackComparison(direct=direct, pullback=pulled, gap=compare_pullback(direct, pulled))
