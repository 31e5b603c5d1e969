"""Conforming triangulations of charted domains.

Code map:
    TriMesh                        Immutable P1 mesh with an ordered boundary cycle
    generate_mesh()                Lattice points + Delaunay + boundary recovery
        _SizeField                 Target size h, optionally graded away from the chart
        _boundary_points()         Resample the polyline to the size field
        _interior_points()         Nested triangular lattices clipped to the polygon
        _conforming_delaunay()     Split missing boundary segments until all are recovered
    refine_mesh()                  Uniform red refinement (nested spaces)
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import shapely
from scipy.spatial import Delaunay, QhullError, cKDTree

from ..errors import ConfigError, GeometryError, ShapeError
from .domain import ChartedDomain

DEFAULT_GRADING = 0.25
BOUNDARY_CLEARANCE = 0.55
MAX_RECOVERY_PASSES = 30


@dataclass(frozen=True, eq=False)
class TriMesh:
    """P1 triangulation with a counter-clockwise boundary cycle.

    Boundary edge ``i`` joins ``boundary_nodes[i]`` to ``boundary_nodes[i + 1]``
    (cyclically); ``boundary_chart[i]`` tags it as lying on the chart. The
    cycle starts at the first vertex of the domain polyline.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_nodes: np.ndarray
    boundary_chart: np.ndarray
    h: float
    domain: ChartedDomain | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_boundary_edges(self) -> int:
        return len(self.boundary_nodes)

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        return np.column_stack([self.boundary_nodes, np.roll(self.boundary_nodes, -1)])

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        a, b = self.boundary_edges.T
        return np.hypot(*(self.nodes[b] - self.nodes[a]).T)

    @cached_property
    def total_boundary_length(self) -> float:
        return float(self.edge_lengths.sum())

    @cached_property
    def edge_arclength(self) -> np.ndarray:
        """Arclength at the start of every boundary edge, plus the total at the end."""
        return np.concatenate([[0.0], np.cumsum(self.edge_lengths)])

    @cached_property
    def edge_midpoints(self) -> np.ndarray:
        a, b = self.boundary_edges.T
        return 0.5 * (self.nodes[a] + self.nodes[b])

    @cached_property
    def areas(self) -> np.ndarray:
        p0, p1, p2 = (self.nodes[self.triangles[:, i]] for i in range(3))
        d1, d2 = p1 - p0, p2 - p0
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def area(self) -> float:
        return float(self.areas.sum())

    @cached_property
    def boundary_line(self) -> shapely.LineString:
        cycle = np.append(self.boundary_nodes, self.boundary_nodes[0])
        return shapely.LineString(self.nodes[cycle])

    def locate(self, points: np.ndarray) -> np.ndarray:
        """Arclength parameter of (near-)boundary points along the boundary cycle."""
        return shapely.line_locate_point(self.boundary_line, shapely.points(np.asarray(points, dtype=float)))

    def check_nodal(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n_nodes,):
            raise ShapeError(f"nodal vector has shape {u.shape}, mesh has {self.n_nodes} nodes")
        return u


class _SizeField:
    """Target element size, graded linearly with the distance to the chart."""

    def __init__(self, domain: ChartedDomain, h: float, h_far: float | None, grading: float):
        self.h = h
        self.h_far = h_far if h_far and h_far > h and domain.chart_segments.any() else h
        self.grading = grading
        self.levels = int(np.floor(np.log2(self.h_far / h) + 1e-12))
        self._tree = None
        if self.levels > 0:
            self._tree = cKDTree(_densify(domain.chart_points, h / 2))

    def __call__(self, points: np.ndarray) -> np.ndarray:
        if self._tree is None:
            return np.full(len(points), self.h)
        dist, _ = self._tree.query(points)
        return np.minimum(self.h_far, self.h + self.grading * dist)

    def level(self, points: np.ndarray) -> np.ndarray:
        ratio = self(points) / self.h
        return np.clip(np.floor(np.log2(ratio) + 1e-12), 0, self.levels).astype(int)


def _densify(polyline: np.ndarray, spacing: float, closed: bool = False) -> np.ndarray:
    pts = np.vstack([polyline, polyline[:1]]) if closed else polyline
    seg = np.diff(pts, axis=0)
    counts = np.maximum(1, np.ceil(np.hypot(*seg.T) / spacing).astype(int))
    t = np.concatenate([np.arange(c) / c for c in counts])
    start = np.repeat(pts[:-1], counts, axis=0)
    out = start + t[:, None] * np.repeat(seg, counts, axis=0)
    return out if closed else np.vstack([out, pts[-1:]])


def _boundary_points(domain: ChartedDomain, size: _SizeField) -> tuple[np.ndarray, np.ndarray]:
    v = domain.vertices
    nxt = np.roll(v, -1, axis=0)
    target = np.minimum(size(v), size(nxt))
    counts = np.maximum(1, np.ceil(domain.segment_lengths / target - 1e-9).astype(int))
    t = np.concatenate([np.arange(c) / c for c in counts])
    points = np.repeat(v, counts, axis=0) + t[:, None] * np.repeat(nxt - v, counts, axis=0)
    return points, np.repeat(domain.chart_segments, counts)


def _interior_points(domain: ChartedDomain, size: _SizeField, boundary: np.ndarray) -> np.ndarray:
    h = size.h
    xmin, ymin, xmax, ymax = domain.polygon.bounds
    row = h * np.sqrt(3.0) / 2
    j = np.arange(int(np.floor(ymin / row)) - 1, int(np.ceil(ymax / row)) + 2)
    i = np.arange(int(np.floor((xmin - j.max() * h / 2) / h)) - 1, int(np.ceil((xmax - j.min() * h / 2) / h)) + 2)
    ii, jj = np.meshgrid(i, j)
    ii, jj = ii.ravel(), jj.ravel()
    pts = np.column_stack([(ii + 0.5 * jj) * h, jj * row])
    box = (pts[:, 0] > xmin) & (pts[:, 0] < xmax) & (pts[:, 1] > ymin) & (pts[:, 1] < ymax)
    pts, ii, jj = pts[box], ii[box], jj[box]

    if size.levels > 0:
        stride = 2 ** size.level(pts)
        keep = (ii % stride == 0) & (jj % stride == 0)
        pts = pts[keep]

    pts = pts[shapely.contains_xy(domain.polygon, pts[:, 0], pts[:, 1])]
    tree = cKDTree(_densify(boundary, h / 4, closed=True))
    dist, _ = tree.query(pts)
    return pts[dist >= BOUNDARY_CLEARANCE * size(pts)]


def _clip_triangles(points: np.ndarray, simplices: np.ndarray, polygon, h: float) -> np.ndarray:
    p0, p1, p2 = (points[simplices[:, i]] for i in range(3))
    d1, d2 = p1 - p0, p2 - p0
    signed = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    centroid = (p0 + p1 + p2) / 3
    keep = shapely.contains_xy(polygon, centroid[:, 0], centroid[:, 1]) & (np.abs(signed) > 1e-12 * h * h)
    tri = simplices[keep].copy()
    flip = signed[keep] < 0
    tri[flip] = tri[flip][:, [0, 2, 1]]
    return tri


def _edge_keys(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    return np.minimum(a, b).astype(np.int64) * n + np.maximum(a, b)


def _triangle_edges(triangles: np.ndarray) -> np.ndarray:
    return np.vstack([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])


def _conforming_delaunay(
    polygon, boundary: np.ndarray, flags: np.ndarray, interior: np.ndarray, h: float
) -> tuple[np.ndarray, np.ndarray, int, np.ndarray]:
    for _ in range(MAX_RECOVERY_PASSES):
        points = np.vstack([boundary, interior])
        n, nb = len(points), len(boundary)
        try:
            simplices = Delaunay(points).simplices
        except QhullError as e:
            raise GeometryError(f"Delaunay triangulation failed: {e}") from e
        triangles = _clip_triangles(points, simplices, polygon, h)
        edges = _triangle_edges(triangles)
        ring = np.arange(nb)
        present = np.isin(_edge_keys(ring, (ring + 1) % nb, n), _edge_keys(edges[:, 0], edges[:, 1], n))
        if present.all():
            return points, triangles, nb, flags
        missing = np.flatnonzero(~present)
        mids = 0.5 * (boundary[missing] + boundary[(missing + 1) % nb])
        boundary = np.insert(boundary, missing + 1, mids, axis=0)
        flags = np.insert(flags, missing + 1, flags[missing])
    raise GeometryError("boundary recovery did not converge; polygon may be degenerate")


def generate_mesh(
    domain: ChartedDomain,
    h: float,
    h_far: float | None = None,
    grading: float = DEFAULT_GRADING,
) -> TriMesh:
    """Triangulate the polygon bounded by the domain polyline.

    Args:
        domain: Base or perturbed domain.
        h: Target size at the chart (everywhere for uniform meshes).
        h_far: Optional coarser size reached away from the chart.
        grading: Growth rate of the size field with distance to the chart.

    Returns:
        A mesh whose boundary cycle starts at the polyline's first vertex and
        whose boundary edges are tagged Chart iff they subdivide a chart segment.

    Raises:
        ConfigError: If h is not positive, or exceeds ε/8 on a perturbed domain.
        GeometryError: If no conforming triangulation is found.
    """
    if not h > 0:
        raise ConfigError("h", f"must be positive, got {h}")
    if domain.is_perturbed and h > domain.eps / 8 * (1 + 1e-9):
        raise ConfigError("h", f"{h} does not resolve period {domain.eps} (need h <= eps/8)")

    size = _SizeField(domain, h, h_far, grading)
    boundary, flags = _boundary_points(domain, size)
    interior = _interior_points(domain, size, boundary)

    points, triangles, nb, flags = _conforming_delaunay(domain.polygon, boundary, flags, interior, h)

    used = np.unique(triangles)
    if not np.isin(np.arange(nb), used).all():
        raise GeometryError("boundary vertex left outside the triangulation")
    remap = np.full(len(points), -1)
    remap[used] = np.arange(len(used))
    triangles = remap[triangles]
    boundary_nodes = remap[np.arange(nb)]

    edges = _triangle_edges(triangles)
    keys, counts = np.unique(_edge_keys(edges[:, 0], edges[:, 1], len(used)), return_counts=True)
    cycle = _edge_keys(boundary_nodes, np.roll(boundary_nodes, -1), len(used))
    if np.count_nonzero(counts == 1) != nb or not np.isin(cycle, keys[counts == 1]).all():
        raise GeometryError("triangulation boundary is not a single closed cycle")

    return TriMesh(points[used], triangles, boundary_nodes, np.asarray(flags, dtype=bool), h, domain)


def refine_mesh(mesh: TriMesh) -> TriMesh:
    """Split every triangle into four; the P1 space of the result contains the original."""
    n = mesh.n_nodes
    edges = _triangle_edges(mesh.triangles)
    keys = _edge_keys(edges[:, 0], edges[:, 1], n)
    unique, inverse = np.unique(keys, return_inverse=True)
    mid_index = n + inverse.reshape(3, -1).T
    lo, hi = unique // n, unique % n
    nodes = np.vstack([mesh.nodes, 0.5 * (mesh.nodes[lo] + mesh.nodes[hi])])

    v0, v1, v2 = mesh.triangles.T
    m01, m12, m20 = mid_index.T
    triangles = np.vstack(
        [
            np.column_stack([v0, m01, m20]),
            np.column_stack([v1, m12, m01]),
            np.column_stack([v2, m20, m12]),
            np.column_stack([m01, m12, m20]),
        ]
    )

    a, b = mesh.boundary_edges.T
    boundary_mid = n + np.searchsorted(unique, _edge_keys(a, b, n))
    boundary_nodes = np.column_stack([a, boundary_mid]).ravel()
    return TriMesh(nodes, triangles, boundary_nodes, np.repeat(mesh.boundary_chart, 2), mesh.h / 2, mesh.domain)
