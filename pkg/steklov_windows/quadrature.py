"""Composite Gauss-Legendre quadrature shared by the geometry and transform code.

Code map:
    gauss_nodes()              Nodes and weights of a uniform composite rule
    integrate()                Apply a composite rule to a vectorized integrand
    integrate_converged()      Double the panel count until two values agree
"""

from collections.abc import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

GAUSS_ORDER = 8
DOUBLING_TOL = 1e-12
MAX_DOUBLINGS = 14

Integrand = Callable[[np.ndarray], np.ndarray]


def gauss_nodes(a: float, b: float, panels: int, order: int = GAUSS_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Return nodes and weights of a composite Gauss rule on [a, b].

    Panel boundaries are uniform, so with ``panels`` a multiple of the number of
    periodic cells every cell boundary is a panel boundary.
    """
    xi, wi = leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
    weights = (half[:, None] * wi[None, :]).ravel()
    return nodes, weights


def integrate(func: Integrand, a: float, b: float, panels: int, order: int = GAUSS_ORDER) -> float:
    nodes, weights = gauss_nodes(a, b, panels, order)
    return float(weights @ func(nodes))


def integrate_converged(
    func: Integrand,
    a: float,
    b: float,
    panels: int = 16,
    order: int = GAUSS_ORDER,
    tol: float = DOUBLING_TOL,
) -> float:
    """Integrate with panel doubling until successive values differ by less than ``tol``.

    Args:
        func: Vectorized integrand.
        a: Lower limit.
        b: Upper limit.
        panels: Initial panel count.
        order: Gauss points per panel.
        tol: Absolute agreement required between successive doublings.

    Returns:
        The finest value computed.
    """
    previous = integrate(func, a, b, panels, order)
    current = previous
    for _ in range(MAX_DOUBLINGS):
        panels *= 2
        current = integrate(func, a, b, panels, order)
        if abs(current - previous) < tol:
            break
        previous = current
    return current
