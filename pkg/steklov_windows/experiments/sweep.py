"""ε-sweeps of the optimal trace constant λ_ε(α) in the three regimes.

Code map:
    SweepConfig                Profile, exponent a, α, p, k list, mesh rule, solver settings
    SweepRow                   One ε: λ_ε(α), gap to the reference, diagnostics, status
    SweepResult                Ordered rows, reference λ(α) or λ*(α), fitted rate
    RateFit / fit_rate()       Least squares of log λ_ε against log ε on the last half
    run_sweep()                Reference solve, rows on a thread pool, ordered merge
        _Reference             Base mesh, measure, window and eigenpair of the limit problem
        _run_row()             Mesh Ω_ε, optimize the window, attach diagnostics
"""

import math
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError, InsufficientData, SteklovError
from ..fem.solvers import SolverConfig, TraceEigenpair
from ..geometry.domain import (
    ChartedDomain,
    ChartFunction,
    OscillationSpec,
    build_base_domain,
    build_perturbed_boundary,
)
from ..geometry.mesh import TriMesh, generate_mesh
from ..measures import (
    arc_measure_errors,
    best_reflection_difference,
    boundary_distance,
    mu_star_measure,
    pullback_boundary_values,
    pullback_window,
    small_value_mass,
    surface_measure,
    weak_measure_test,
)
from ..transforms.perturbation import PerturbationMap
from ..windows.optimize import optimize_window, solve_limit_problem
from ..windows.window import Window
from .subcritical import DEFAULT_DELTA, build_witness, check_subcritical_bound, subcritical_bound

SMALL_VALUE_LEVEL = 10
TEST_FUNCTIONS = {
    "one": lambda x: np.ones(len(x)),
    "x": lambda x: x[:, 0],
    "y": lambda x: x[:, 1],
}


@dataclass(frozen=True)
class SweepConfig:
    """Everything that determines a sweep; equal configs give identical reports."""

    a: float
    alpha: float = 0.3
    p: float = 2.0
    ks: tuple[int, ...] = (4, 8, 16, 32)
    profile: str = "sin2"
    coefficients: tuple[tuple[float, float], ...] = ()
    phi_offset: float = 1.0
    phi_slope: float = 0.0
    phi_bumps: tuple[float, ...] = ()
    resolution: float = 1 / 64
    h_factor: float = 8.0
    h_min: float = 1 / 512
    h_far: float = 0.0
    grading: float = 0.25
    tol_lambda: float = 1e-8
    max_iter: int = 500
    seed: int = 0
    restarts: int = 3
    arc_scan: int = 0
    delta: float = DEFAULT_DELTA
    threads: int = 1
    verbosity: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha", f"must lie in (0, 1), got {self.alpha}")
        if not self.a > 0:
            raise ConfigError("a", f"must be positive, got {self.a}")
        if self.p < 2:
            raise ConfigError("p", f"must be >= 2, got {self.p}")
        ks = tuple(int(k) for k in self.ks)
        if any(k < 2 for k in ks) or list(ks) != sorted(set(ks)):
            raise ConfigError("k", f"must be ascending distinct integers >= 2, got {list(self.ks)}")
        if self.h_factor < 8:
            raise ConfigError("h_factor", "meshes must resolve the period with h <= eps/8")
        object.__setattr__(self, "ks", ks)
        object.__setattr__(self, "coefficients", tuple(tuple(c) for c in self.coefficients))
        object.__setattr__(self, "phi_bumps", tuple(self.phi_bumps))

    @property
    def regime(self) -> str:
        if self.a < 1:
            return "subcritical"
        return "critical" if self.a == 1 else "supercritical"

    def oscillation(self) -> OscillationSpec:
        return OscillationSpec(profile=self.profile, a=self.a, coefficients=self.coefficients)

    def chart(self) -> ChartFunction:
        return ChartFunction(self.phi_offset, self.phi_slope, self.phi_bumps)

    def solver(self) -> SolverConfig:
        return SolverConfig(tol_lambda=self.tol_lambda, max_iter=self.max_iter, seed=self.seed)

    def mesh_size(self, k: int) -> float:
        """h(ε) = ε / h_factor, but not below h_min."""
        return max(1.0 / (self.h_factor * k), self.h_min)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SweepRow:
    k: int
    eps: float
    lam: float = math.nan
    ref_lambda: float = math.nan
    rel_gap: float = math.nan
    slope_running: float = math.nan
    delta_measure: float = math.nan
    weakstar_err: float = math.nan
    iterations: int = 0
    status: str = "ok"
    bound: float = math.nan
    c_hat: float = math.nan
    eig_distance: float = math.nan
    small_mass: float = math.nan
    arc_error: float = math.nan
    weak_terms: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual: float
    n_rows: int

    @property
    def constant(self) -> float:
        """C in λ_ε ≈ C ε^slope."""
        return float(np.exp(self.intercept))


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[SweepRow] = field(default_factory=list)
    reference: float | None = None
    reference_kind: str | None = None
    fit: RateFit | None = None

    @property
    def ok_rows(self) -> list[SweepRow]:
        return [row for row in self.rows if row.ok and row.lam > 0]


def fit_rate(result: SweepResult | Sequence[SweepRow]) -> RateFit:
    """Fit log λ_ε = intercept + slope · log ε on the last ⌈n/2⌉ (at least 3) successful rows.

    Raises:
        InsufficientData: If fewer than three rows have λ_ε > 0.
    """
    rows = result.rows if isinstance(result, SweepResult) else list(result)
    rows = [row for row in rows if row.ok and row.lam > 0]
    if len(rows) < 3:
        raise InsufficientData(f"rate fit needs 3 successful rows, got {len(rows)}")
    rows = rows[-max(3, math.ceil(len(rows) / 2)) :]
    x = np.log([row.eps for row in rows])
    y = np.log([row.lam for row in rows])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (intercept + slope * x)) ** 2)))
    return RateFit(slope=float(slope), intercept=float(intercept), residual=residual, n_rows=len(rows))


@dataclass(frozen=True, eq=False)
class _Reference:
    mesh: TriMesh
    measure: object
    window: Window
    pair: TraceEigenpair
    kind: str


def _solve_reference(config: SweepConfig, base: ChartedDomain, osc: OscillationSpec) -> _Reference | None:
    if config.a < 1 and not osc.is_constant:
        return None
    h = min(config.mesh_size(k) for k in config.ks)
    mesh = generate_mesh(base, h, config.h_far or None, config.grading)
    if config.a == 1 and not osc.is_constant:
        measure, kind = mu_star_measure(mesh, osc), "lambda_star"
    else:
        measure, kind = surface_measure(mesh), "lambda"
    window, pair = solve_limit_problem(
        mesh, measure, config.alpha, config.p, config.solver(), restarts=config.restarts, arc_scan=config.arc_scan
    )
    return _Reference(mesh, measure, window, pair, kind)


def _attach_limit_diagnostics(row, reference, eps_mesh, window, pair, base, osc, eps) -> None:
    pmap = PerturbationMap(base, osc, eps)
    nu_eps = pullback_window(window, eps_mesh, reference.mesh, pmap)
    row.delta_measure = best_reflection_difference(nu_eps, reference.window, reference.mesh)
    row.weak_terms = {
        name: weak_measure_test(f, nu_eps, reference.window, reference.mesh, pmap).value
        for name, f in TEST_FUNCTIONS.items()
    }
    row.weakstar_err = max(row.weak_terms.values())
    v = pullback_boundary_values(reference.mesh, eps_mesh, pmap, pair.u)
    row.eig_distance = boundary_distance(reference.mesh, v, reference.pair.u, reference.measure)
    row.arc_error = arc_measure_errors(base.phi, osc, eps)


def _run_row(config: SweepConfig, base: ChartedDomain, osc: OscillationSpec, reference, k: int) -> SweepRow:
    eps = 1.0 / k
    row = SweepRow(k=k, eps=eps)
    try:
        eps_mesh = generate_mesh(
            build_perturbed_boundary(base, osc, eps), config.mesh_size(k), config.h_far or None, config.grading
        )
        measure = surface_measure(eps_mesh)
        window, pair, trace = optimize_window(
            eps_mesh,
            config.alpha,
            config.p,
            measure,
            config.solver(),
            restarts=config.restarts,
            arc_scan=config.arc_scan,
        )
        row.lam = pair.lam
        row.iterations = trace.iterations
        row.small_mass = small_value_mass(eps_mesh, pair, SMALL_VALUE_LEVEL, measure)

        if config.a < 1:
            witness = build_witness(eps_mesh, osc, config.alpha, config.delta, p=config.p)
            row.bound = subcritical_bound(eps_mesh, witness, config.p)
            row.c_hat = witness.c_hat
            check_subcritical_bound(row.bound, witness, row.lam, eps, config.a)
        if reference is not None:
            row.ref_lambda = reference.pair.lam
            row.rel_gap = abs(row.lam - row.ref_lambda) / row.ref_lambda
            _attach_limit_diagnostics(row, reference, eps_mesh, window, pair, base, osc, eps)
    except SteklovError as e:
        row.status = f"failed: {type(e).__name__}: {e}"
    return row


def _running_slopes(rows: list[SweepRow]) -> None:
    for i, row in enumerate(rows):
        done = [r for r in rows[: i + 1] if r.ok and r.lam > 0]
        if row.ok and len(done) >= 2:
            row.slope_running = float(np.polyfit(np.log([r.eps for r in done]), np.log([r.lam for r in done]), 1)[0])


def run_sweep(config: SweepConfig, threads: int | None = None) -> SweepResult:
    """Compute λ_ε(α) for every ε = 1/k of the config and compare with the limit.

    Rows run concurrently; a row whose mesh or solve fails is marked failed and
    the sweep carries on. The reference λ(α) (a > 1, or f ≡ 0) or λ*(α)
    (a = 1) is solved once on a base mesh with the smallest h of the sweep.

    Raises:
        ConfigError: If the configuration is invalid.
    """
    verbose = config.verbosity > 0
    threads = threads or config.threads or 1
    osc = config.oscillation()
    base = build_base_domain("square", config.chart(), config.resolution)

    if verbose:
        print(f"🚀 Sweep: {config.regime} regime, a={config.a}, alpha={config.alpha}, p={config.p}")
        print("=" * 60)
    total_start = time.time()

    reference = None
    start = time.time()
    try:
        reference = _solve_reference(config, base, osc)
    except SteklovError as e:
        if verbose:
            print(f"❌ Reference solve failed: {e}")
    if verbose and reference is not None:
        print(f"✅ Reference {reference.kind} = {reference.pair.lam:.8g} in {time.time() - start:.1f}s")

    result = SweepResult(config=config, reference_kind=reference.kind if reference else None)
    result.reference = reference.pair.lam if reference else None

    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = pool.map(lambda k: _run_row(config, base, osc, reference, k), config.ks)
        for row in rows:
            result.rows.append(row)
            if verbose:
                mark = "✅" if row.ok else "❌"
                print(f"{mark} k={row.k:<4d} lambda={row.lam:.8g}  {row.status}")

    _running_slopes(result.rows)
    try:
        result.fit = fit_rate(result)
    except InsufficientData as e:
        if verbose:
            print(f"⚠️  {e}")

    if verbose:
        print("=" * 60)
        if result.fit is not None:
            print(f"🔧 Fitted slope {result.fit.slope:.4f} (C ≈ {result.fit.constant:.4g})")
        print(f"⏱️  Total time: {time.time() - total_start:.1f}s")
    return result


def default_output(config: SweepConfig, results_dir: Path) -> Path:
    return results_dir / f"sweep_{config.regime}_a{config.a:g}.csv"
