"""Homogenized boundary weight m and the weak-* convergence diagnostic.

Code map:
    homogenized_weight()        m(Φ') = ∫_Y √(1 + (Φ' + f'(y))²) dy / √(1 + Φ'²)
    homogenized_weights()       Vectorized m over an array of slopes
    limit_density()             Limit of J_τT_ε^{-1}: m for a = 1, 1 for a > 1
    WeightField / weight_field()  m on a chart grid and μ*(∂Ω)
    WeakStarRow / weakstar_test()  |∫ g J_τT_ε^{-1} dS − ∫ g m dS| along ε = 1/k
    write_weakstar_csv()        (k, eps, g_id, error)
"""

import csv
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..geometry.domain import ChartedDomain, ChartFunction, OscillationSpec, cells_from_eps
from ..quadrature import DOUBLING_TOL, gauss_nodes, integrate_converged

MIN_PANELS = 16
_CHART_PANELS = 256


def homogenized_weight(phi_slope: float, osc: OscillationSpec, quad_order: int = MIN_PANELS) -> float:
    """Cell average of the perturbed-to-flat arclength ratio at slope Φ'.

    Args:
        phi_slope: Local chart slope Φ'(x').
        osc: Oscillation profile.
        quad_order: Initial composite Gauss panels per cell (at least 16).

    Returns:
        m ≥ 1, converged by panel doubling to 1e-12.
    """
    if quad_order < MIN_PANELS:
        raise ConfigError("quad_order", f"needs at least {MIN_PANELS} panels per cell")
    s = float(phi_slope)
    cell = integrate_converged(lambda y: np.sqrt(1.0 + (s + osc.fprime(y)) ** 2), 0.0, 1.0, panels=quad_order)
    return cell / float(np.sqrt(1.0 + s * s))


def homogenized_weights(slopes: np.ndarray, osc: OscillationSpec, quad_order: int = MIN_PANELS) -> np.ndarray:
    slopes = np.asarray(slopes, dtype=float)
    if osc.is_constant:
        return np.ones_like(slopes)
    unique, inverse = np.unique(slopes, return_inverse=True)
    if len(unique) <= 32:
        values = np.array([homogenized_weight(s, osc, quad_order) for s in unique])
        return values[inverse].reshape(slopes.shape)

    panels = quad_order
    y, w = gauss_nodes(0.0, 1.0, panels)
    previous = np.sqrt(1.0 + (unique[:, None] + osc.fprime(y)[None, :]) ** 2) @ w
    for _ in range(12):
        panels *= 2
        y, w = gauss_nodes(0.0, 1.0, panels)
        current = np.sqrt(1.0 + (unique[:, None] + osc.fprime(y)[None, :]) ** 2) @ w
        if np.max(np.abs(current - previous)) < DOUBLING_TOL:
            break
        previous = current
    return (current / np.sqrt(1.0 + unique**2))[inverse].reshape(slopes.shape)


def limit_density(slopes: np.ndarray, osc: OscillationSpec) -> np.ndarray:
    """Weak-* limit of J_τT_ε^{-1} on the chart.

    Raises:
        ConfigError: For a < 1, where the boundary length diverges.
    """
    if osc.a < 1.0 and not osc.is_constant:
        raise ConfigError("a", "boundary measures have no finite limit for a < 1")
    if osc.a > 1.0:
        return np.ones_like(np.asarray(slopes, dtype=float))
    return homogenized_weights(slopes, osc)


@dataclass(frozen=True, eq=False)
class WeightField:
    """m sampled on chart quadrature points plus the total μ*(∂Ω)."""

    x: np.ndarray
    values: np.ndarray
    total_weighted_length: float


def weight_field(domain: ChartedDomain, osc: OscillationSpec, panels: int = _CHART_PANELS) -> WeightField:
    phi = domain.phi
    if phi is None:
        raise ConfigError("domain", "weight field needs a charted domain")
    x, w = gauss_nodes(0.0, 1.0, panels)
    m = homogenized_weights(phi.derivative(x), osc)
    chart = float(w @ (m * np.sqrt(1.0 + phi.derivative(x) ** 2)))
    base = domain.base or domain
    off_chart = base.length - base.chart_length
    return WeightField(x=x, values=m, total_weighted_length=chart + off_chart)


@dataclass(frozen=True)
class WeakStarRow:
    k: int
    eps: float
    g_id: str
    error: float


def _chart_integral(func: Callable[[np.ndarray], np.ndarray], panels: int) -> float:
    return integrate_converged(func, 0.0, 1.0, panels=panels)


def weakstar_test(
    g: Callable[[np.ndarray], np.ndarray],
    eps_list: Sequence[float],
    osc: OscillationSpec,
    phi: ChartFunction,
    g_id: str = "g",
) -> list[WeakStarRow]:
    """Compare ∫ g J_τT_ε^{-1} dS with its limit on the chart for every ε.

    Both sides are integrals over x' ∈ (0, 1): the perturbed side has density
    √(1 + (Φ' + ε^{a−1} f'(x'/ε))²) and the limit side m(x')√(1 + Φ'²).
    """
    x, w = gauss_nodes(0.0, 1.0, _CHART_PANELS)
    dphi = phi.derivative(x)
    limit = float(w @ (g(x) * limit_density(dphi, osc) * np.sqrt(1.0 + dphi**2)))

    rows = []
    for eps in eps_list:
        k = cells_from_eps(eps)
        scale = eps ** (osc.a - 1.0)

        def perturbed(t, eps=eps, scale=scale):
            return g(t) * np.sqrt(1.0 + (phi.derivative(t) + scale * osc.fprime(t / eps)) ** 2)

        value = _chart_integral(perturbed, 16 * k)
        rows.append(WeakStarRow(k=k, eps=eps, g_id=g_id, error=abs(value - limit)))
    return rows


def write_weakstar_csv(rows: Sequence[WeakStarRow], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["k", "eps", "g_id", "error"])
        for row in rows:
            writer.writerow([row.k, repr(row.eps), row.g_id, repr(row.error)])
    return path
