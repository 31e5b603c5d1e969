"""Boundary windows Γ as per-edge fractions and the bathtub update.

Code map:
    Window                  fractions, edge weights, target measure α·total
    initial_arc()           Contiguous arc of measure α·total from a start edge
    bathtub_update()        Sublevel set of the edge-average |u|^p with the target measure
    reflect_window()        Mirror image about a vertical axis
    write_window()          CSV (edge, fraction, arclength start/end) plus JSON summary
"""

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError, MeasureError
from ..geometry.mesh import TriMesh

CHANGE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Window:
    """Γ ⊂ ∂Ω: ``fractions[i]`` of boundary edge ``i`` (by length) belongs to Γ.

    ``weights`` are the edge weights of the measure the window is constrained in,
    and ``target`` is α times their total.
    """

    fractions: np.ndarray
    weights: np.ndarray
    target: float

    def __post_init__(self):
        fractions = np.asarray(self.fractions, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if fractions.shape != weights.shape:
            raise MeasureError("window fractions and edge weights differ in length")
        if np.any(fractions < 0) or np.any(fractions > 1):
            raise MeasureError("window fractions must lie in [0, 1]")
        object.__setattr__(self, "fractions", fractions)
        object.__setattr__(self, "weights", weights)

    @property
    def measure(self) -> float:
        return float(self.fractions @ self.weights)

    @property
    def alpha(self) -> float:
        return self.target / float(self.weights.sum())

    @property
    def n_fractional(self) -> int:
        return int(np.count_nonzero((self.fractions > 0) & (self.fractions < 1)))

    def changed_edges(self, other: "Window") -> int:
        if other.fractions.shape != self.fractions.shape:
            raise MeasureError("windows live on different boundary discretizations")
        return int(np.count_nonzero(np.abs(self.fractions - other.fractions) > CHANGE_TOL))


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha", f"must lie in (0, 1), got {alpha}")


def _fill(order: np.ndarray, weights: np.ndarray, target: float) -> np.ndarray:
    """Take edges in ``order`` until ``target`` is reached; the last one fractionally."""
    fractions = np.zeros(len(weights))
    before = np.concatenate([[0.0], np.cumsum(weights[order])])
    full = np.searchsorted(before, target, side="right") - 1
    fractions[order[:full]] = 1.0
    if full < len(order):
        last = order[full]
        remaining = target - before[full]
        if weights[last] > 0 and remaining > 0:
            fractions[last] = min(1.0, remaining / weights[last])
    return fractions


def initial_arc(measure, alpha: float, start: int = 0) -> Window:
    """Contiguous arc of measure α·μ(∂Ω) beginning at boundary edge ``start``."""
    _check_alpha(alpha)
    weights = measure.weights
    target = alpha * float(weights.sum())
    order = (start + np.arange(len(weights))) % len(weights)
    return Window(_fill(order, weights, target), weights, target)


def edge_averages(mesh: TriMesh, u: np.ndarray, p: float) -> np.ndarray:
    """Simpson average of |u|^p over every boundary edge."""
    a, b = mesh.boundary_edges.T
    ua, ub = np.abs(u[a]), np.abs(u[b])
    um = 0.5 * np.abs(u[a] + u[b])
    return (ua**p + 4 * um**p + ub**p) / 6.0


def bathtub_update(mesh: TriMesh, pair, alpha: float, measure) -> Window:
    """Window of measure α·μ(∂Ω) where the eigenfunction is smallest.

    Edges are taken in ascending order of their average |u|^p (ties by edge
    index) and the last one is split fractionally.
    """
    _check_alpha(alpha)
    measure.check_mesh(mesh)
    u = mesh.check_nodal(pair.u)
    order = np.argsort(edge_averages(mesh, u, pair.p), kind="stable")
    weights = measure.weights
    target = alpha * float(weights.sum())
    return Window(_fill(order, weights, target), weights, target)


def _periodic_cumulative(knots: np.ndarray, values: np.ndarray, x: np.ndarray) -> np.ndarray:
    period, total = knots[-1], values[-1]
    turns = np.floor(x / period)
    return np.interp(x - turns * period, knots, values) + turns * total


def reflect_window(window: Window, mesh: TriMesh, axis: float = 0.5) -> Window:
    """Mirror Γ about the line x' = ``axis``; the boundary must be symmetric about it.

    The reflection reverses the orientation of the boundary cycle, so the
    reflected cumulative window length at arclength t is G(c) − G(c − t), where
    c is the arclength of the mirror image of the cycle's first vertex.
    """
    if len(window.fractions) != mesh.n_boundary_edges:
        raise MeasureError("window and mesh have different boundary discretizations")
    knots = mesh.edge_arclength
    cumulative = np.concatenate([[0.0], np.cumsum(window.fractions * mesh.edge_lengths)])
    first = mesh.nodes[mesh.boundary_nodes[0]]
    c = float(mesh.locate(np.array([[2 * axis - first[0], first[1]]]))[0])

    reflected = _periodic_cumulative(knots, cumulative, c) - _periodic_cumulative(knots, cumulative, c - knots)
    fractions = np.clip(np.diff(reflected) / mesh.edge_lengths, 0.0, 1.0)
    return Window(fractions, window.weights, window.target)


def write_window(
    mesh: TriMesh,
    window: Window,
    path: Path,
    lam: float | None = None,
    iterations: int = 0,
    restarts: int = 0,
) -> Path:
    """Write ``path`` (edge, fraction, s_start, s_end) and a ``.json`` summary beside it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    starts = mesh.edge_arclength
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["edge", "fraction", "s_start", "s_end"])
        for i, fraction in enumerate(window.fractions):
            writer.writerow([i, repr(float(fraction)), repr(float(starts[i])), repr(float(starts[i + 1]))])

    summary = {
        "alpha": window.alpha,
        "lambda": lam,
        "measure": window.measure,
        "iterations": iterations,
        "restarts": restarts,
    }
    with open(path.with_suffix(".json"), "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2)
    return path
