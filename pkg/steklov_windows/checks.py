"""Invariant suite for the perturbation map and the homogenized weight.

Code map:
    CheckResult                  Name, pass flag, one-line detail, timing
    check_weight_identity()      m ≡ 1 for f ≡ 0 at 20 slopes
    check_weight_lower_bound()   m ≥ 1 for the default profile
    check_boundary_map()         T_ε maps the perturbed chart onto the graph of Φ
    check_inverse()              Round trip T_ε(T_ε^{-1}(y)) = y in the boundary layer
    check_tangential_jacobian()  J_τ = |DT^{-T} n| J agrees with the arclength ratio
    check_interior_identity()    T_ε is the identity deeper than √ε
    weakstar_rows()              Weak-* error rows for g ∈ {1, x, x²}, written by check-transform --output
    check_weakstar()             Weak-* errors non-increasing along ε = 1/k
    run_checks()                 Run every check and print a summary
"""

import time
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .geometry.domain import OscillationSpec, build_base_domain
from .transforms.perturbation import PerturbationMap, jacobian_at, tangential_jacobian_inverse
from .transforms.weight import WeakStarRow, homogenized_weight, homogenized_weights, weakstar_test

CHECK_EPS = 1 / 8
CHECK_KS = (4, 8, 16, 32)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _critical_map(a: float = 1.0) -> PerturbationMap:
    return PerturbationMap(build_base_domain("square"), OscillationSpec(a=a), CHECK_EPS)


def check_weight_identity() -> tuple[bool, str]:
    flat = OscillationSpec.flat()
    err = max(abs(homogenized_weight(s, flat) - 1.0) for s in np.linspace(-2.0, 2.0, 20))
    return err <= 1e-12, f"max |m - 1| = {err:.2e}"


def check_weight_lower_bound() -> tuple[bool, str]:
    m = homogenized_weights(np.linspace(-2.0, 2.0, 41), OscillationSpec())
    return bool(np.all(m >= 1.0)), f"min m = {m.min():.6f}"


def check_boundary_map() -> tuple[bool, str]:
    pmap = _critical_map()
    x = np.linspace(0.0, 1.0, 257)
    chart = np.column_stack([x, pmap.domain.phi(x) + pmap.amplitude * pmap.osc.f(x / pmap.eps)])
    err = float(np.max(np.abs(pmap.forward(chart)[:, 1] - pmap.domain.phi(x))))
    return err <= 1e-10, f"max height error = {err:.2e}"


def check_inverse() -> tuple[bool, str]:
    pmap = _critical_map()
    rng = np.random.default_rng(0)
    x = rng.uniform(0.0, 1.0, 500)
    y = pmap.domain.phi(x) - rng.uniform(0.0, 1.2 * pmap.cutoff_width, 500)
    points = np.column_stack([x, y])
    err = float(np.max(np.linalg.norm(pmap.forward(pmap.inverse(points)) - points, axis=1)))
    return err <= 1e-10, f"max round-trip error = {err:.2e}"


def check_tangential_jacobian() -> tuple[bool, str]:
    pmap = _critical_map()
    errors = []
    for x in np.linspace(0.01, 0.99, 25):
        point = (x, float(pmap.domain.phi(x) + pmap.amplitude * pmap.osc.f(x / pmap.eps)))
        bundle = jacobian_at(pmap, point)
        direct = 1.0 / float(tangential_jacobian_inverse(pmap, x))
        errors.append(abs(bundle.Jtau - direct))
    err = max(errors)
    return err <= 1e-12, f"max |J_tau - ratio| = {err:.2e}"


def check_interior_identity() -> tuple[bool, str]:
    pmap = _critical_map()
    g = np.linspace(0.05, 0.95, 19)
    xx, yy = np.meshgrid(g, g)
    points = np.column_stack([xx.ravel(), yy.ravel()])
    deep = points[pmap.domain.phi(points[:, 0]) - points[:, 1] > pmap.cutoff_width]
    identical = bool(np.array_equal(pmap.forward(deep), deep))
    return identical, f"{len(deep)} deep points mapped {'exactly' if identical else 'inexactly'}"


WEAKSTAR_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "one": np.ones_like,
    "x": lambda x: x,
    "x2": lambda x: x**2,
}


def weakstar_rows(functions: dict[str, Callable[[np.ndarray], np.ndarray]] | None = None) -> list[WeakStarRow]:
    """Weak-* errors of the default profile along CHECK_KS, one row per (g, ε)."""
    phi = build_base_domain().phi
    eps_list = [1 / k for k in CHECK_KS]
    rows = []
    for g_id, g in (functions or WEAKSTAR_FUNCTIONS).items():
        rows.extend(weakstar_test(g, eps_list, OscillationSpec(), phi, g_id))
    return rows


def check_weakstar() -> tuple[bool, str]:
    rows = weakstar_rows({"x2": WEAKSTAR_FUNCTIONS["x2"]})
    errors = [row.error for row in rows]
    ok = all(b <= a for a, b in zip(errors, errors[1:]))
    return ok, "errors " + ", ".join(f"{e:.2e}" for e in errors)


CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("weight identity", check_weight_identity),
    ("m >= 1", check_weight_lower_bound),
    ("boundary correspondence", check_boundary_map),
    ("inverse round trip", check_inverse),
    ("tangential Jacobian", check_tangential_jacobian),
    ("deep-interior identity", check_interior_identity),
    ("weak-* monotonicity", check_weakstar),
]


def run_checks(verbose: bool = True) -> list[CheckResult]:
    """Run the suite; a check that raises counts as failed."""
    if verbose:
        print("🚀 Transform invariant checks")
        print("=" * 60)

    results = []
    for name, check in CHECKS:
        start = time.time()
        try:
            passed, detail = check()
        except Exception as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        result = CheckResult(name, bool(passed), detail, time.time() - start)
        results.append(result)
        if verbose:
            mark = "✅" if result.passed else "❌"
            print(f"{mark} {name}: {detail} ({result.seconds:.2f}s)")

    if verbose:
        print("=" * 60)
        failed = sum(not r.passed for r in results)
        print("🎉 All checks passed" if not failed else f"❌ {failed} of {len(results)} checks failed")
    return results
