"""Charted base domains and their oscillating perturbations.

Coordinates are stored as ``(x', x1)``: horizontal chart variable first, height second.

Code map:
    ChartFunction                  Chart height Φ with its derivative
    OscillationSpec                Periodic profile f, exponent a, cell statistics
    ChartedDomain                  Closed CCW boundary polyline with chart segment flags
    cells_from_eps()               Validate ε = 1/k and return k
    build_base_domain()            Unit square with top chart, or unit disk
    build_perturbed_boundary()     Replace the chart by Φ(x') + ε^a f(x'/ε)
    perturbed_chart_length()       Quadrature arclength of the oscillating chart
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np
import shapely

from ..errors import ConfigError, GeometryError
from ..quadrature import gauss_nodes, integrate_converged

MIN_POINTS_PER_PERIOD = 16
_SAMPLE_POINTS = 8193


class DomainKind(str, Enum):
    SQUARE_TOP_CHART = "square"
    UNIT_DISK = "disk"


class ProfileKind(str, Enum):
    SIN_SQUARED = "sin2"
    FOURIER = "fourier"


@dataclass(frozen=True)
class ChartFunction:
    """Chart height Φ(x') = offset + slope·x' + Σ_j bumps[j]·sin((j+1)πx').

    The bump terms vanish at both chart endpoints, so Φ(0) = offset and
    Φ(1) = offset + slope.
    """

    offset: float = 1.0
    slope: float = 0.0
    bumps: tuple[float, ...] = ()

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        value = self.offset + self.slope * x
        for j, b in enumerate(self.bumps, start=1):
            value = value + b * np.sin(j * np.pi * x)
        return value

    def derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        value = np.full_like(x, self.slope)
        for j, b in enumerate(self.bumps, start=1):
            value = value + b * j * np.pi * np.cos(j * np.pi * x)
        return value

    @cached_property
    def max_slope(self) -> float:
        """Largest |Φ'| on a dense sample of [0, 1]."""
        if not self.bumps:
            return abs(self.slope)
        return float(np.max(np.abs(self.derivative(np.linspace(0.0, 1.0, _SAMPLE_POINTS)))))


@dataclass(frozen=True)
class OscillationSpec:
    """Periodic boundary profile f on the cell Y' = [0, 1] with amplitude exponent a.

    ``coefficients`` holds ``(c_j, s_j)`` pairs of a Fourier profile
    f(y) = Σ_j c_j cos(2πjy) + s_j sin(2πjy); the empty list is f ≡ 0.
    """

    profile: ProfileKind = ProfileKind.SIN_SQUARED
    a: float = 1.0
    coefficients: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigError("a", f"amplitude exponent must be positive, got {self.a}")
        object.__setattr__(self, "profile", ProfileKind(self.profile))
        object.__setattr__(self, "coefficients", tuple((float(c), float(s)) for c, s in self.coefficients))

    @classmethod
    def flat(cls, a: float = 1.0) -> "OscillationSpec":
        """The zero profile f ≡ 0."""
        return cls(profile=ProfileKind.FOURIER, a=a)

    def f(self, y) -> np.ndarray:
        y = np.mod(np.asarray(y, dtype=float), 1.0)
        if self.profile is ProfileKind.SIN_SQUARED:
            return np.sin(np.pi * y) ** 2
        value = np.zeros_like(y)
        for j, (c, s) in enumerate(self.coefficients, start=1):
            value = value + c * np.cos(2 * np.pi * j * y) + s * np.sin(2 * np.pi * j * y)
        return value

    def fprime(self, y) -> np.ndarray:
        y = np.mod(np.asarray(y, dtype=float), 1.0)
        if self.profile is ProfileKind.SIN_SQUARED:
            return np.pi * np.sin(2 * np.pi * y)
        value = np.zeros_like(y)
        for j, (c, s) in enumerate(self.coefficients, start=1):
            w = 2 * np.pi * j
            value = value - c * w * np.sin(w * y) + s * w * np.cos(w * y)
        return value

    @property
    def is_constant(self) -> bool:
        return self.profile is ProfileKind.FOURIER and all(c == 0 and s == 0 for c, s in self.coefficients)

    @cached_property
    def mean_grad(self) -> float:
        """∫_Y |f'(y)| dy."""
        if self.profile is ProfileKind.SIN_SQUARED:
            return 2.0
        if self.is_constant:
            return 0.0
        return integrate_converged(lambda y: np.abs(self.fprime(y)), 0.0, 1.0, panels=64)

    @cached_property
    def _samples(self) -> np.ndarray:
        return self.f(np.linspace(0.0, 1.0, _SAMPLE_POINTS))

    @cached_property
    def sup_f(self) -> float:
        if self.profile is ProfileKind.SIN_SQUARED:
            return 1.0
        return float(np.max(self._samples)) if not self.is_constant else 0.0

    @cached_property
    def inf_f(self) -> float:
        if self.profile is ProfileKind.SIN_SQUARED:
            return 0.0
        return float(np.min(self._samples)) if not self.is_constant else 0.0

    @cached_property
    def sup_fprime(self) -> float:
        if self.profile is ProfileKind.SIN_SQUARED:
            return float(np.pi)
        if self.is_constant:
            return 0.0
        return float(np.max(np.abs(self.fprime(np.linspace(0.0, 1.0, _SAMPLE_POINTS)))))


def cells_from_eps(eps: float) -> int:
    """Return k for ε = 1/k, k ≥ 2.

    Raises:
        ConfigError: If ε is not the reciprocal of an integer k ≥ 2.
    """
    if not eps > 0:
        raise ConfigError("eps", f"must be positive, got {eps}")
    k = int(round(1.0 / eps))
    if k < 2 or abs(k * eps - 1.0) > 1e-9:
        raise ConfigError("eps", f"{eps} is not 1/k for an integer k >= 2")
    return k


@dataclass(frozen=True, eq=False)
class ChartedDomain:
    """Base domain Ω (or a perturbed Ω_ε) described by its boundary polyline.

    ``vertices`` run counter-clockwise without repeating the first vertex;
    ``chart_segments[i]`` flags the segment ``vertices[i] -> vertices[i+1]``.
    Perturbed domains keep a reference to their ``base`` and the
    ``oscillation``/``eps`` that produced them.
    """

    kind: DomainKind
    vertices: np.ndarray
    chart_segments: np.ndarray
    resolution: float
    phi: ChartFunction | None = None
    chart_interval: tuple[float, float] = (0.0, 1.0)
    oscillation: OscillationSpec | None = None
    eps: float | None = None
    base: "ChartedDomain | None" = field(default=None, repr=False)

    @property
    def is_perturbed(self) -> bool:
        return self.eps is not None

    @cached_property
    def segment_lengths(self) -> np.ndarray:
        nxt = np.roll(self.vertices, -1, axis=0)
        return np.hypot(*(nxt - self.vertices).T)

    @property
    def length(self) -> float:
        return float(self.segment_lengths.sum())

    @property
    def chart_length(self) -> float:
        return float(self.segment_lengths[self.chart_segments].sum())

    @cached_property
    def ring(self) -> shapely.LinearRing:
        return shapely.LinearRing(self.vertices)

    @cached_property
    def polygon(self) -> shapely.Polygon:
        return shapely.Polygon(self.vertices)

    @cached_property
    def chart_points(self) -> np.ndarray:
        """Vertices of the chart portion, in boundary order (x' decreasing)."""
        idx = np.flatnonzero(self.chart_segments)
        if idx.size == 0:
            return np.empty((0, 2))
        ends = (idx + 1) % len(self.vertices)
        return np.vstack([self.vertices[idx], self.vertices[ends[-1:]]])

    def chart_height(self, x) -> np.ndarray:
        """Height of the (possibly perturbed) chart over x'."""
        if self.phi is None:
            raise GeometryError(f"{self.kind.value} domain has no chart")
        height = self.phi(x)
        if self.is_perturbed:
            osc = self.oscillation
            height = height + self.eps**osc.a * osc.f(np.asarray(x) / self.eps)
        return height


def _validate(vertices: np.ndarray) -> None:
    ring = shapely.LinearRing(vertices)
    if not ring.is_simple or not ring.is_valid:
        raise GeometryError("boundary polyline self-intersects")
    if not ring.is_ccw:
        raise GeometryError("boundary polyline is not positively oriented")


def _square_polyline(chart_x: np.ndarray, chart_y: np.ndarray, resolution: float) -> tuple[np.ndarray, np.ndarray]:
    """Close a top chart sampled from x'=1 down to x'=0 with the square's sides and bottom."""
    right_height, left_height = chart_y[0], chart_y[-1]
    if min(right_height, left_height, float(np.min(chart_y))) <= 0:
        raise GeometryError("chart must stay above the bottom edge")

    n_bottom = max(1, int(np.ceil(1.0 / resolution)))
    bottom_x = np.linspace(0.0, 1.0, n_bottom + 1)[:-1]
    bottom = np.column_stack([bottom_x, np.zeros_like(bottom_x)])

    n_right = max(1, int(np.ceil(right_height / resolution)))
    right_y = np.linspace(0.0, right_height, n_right + 1)[:-1]
    right = np.column_stack([np.ones_like(right_y), right_y])

    chart = np.column_stack([chart_x[:-1], chart_y[:-1]])

    n_left = max(1, int(np.ceil(left_height / resolution)))
    left_y = np.linspace(left_height, 0.0, n_left + 1)[:-1]
    left = np.column_stack([np.zeros_like(left_y), left_y])

    vertices = np.vstack([bottom, right, chart, left])
    flags = np.zeros(len(vertices), dtype=bool)
    start = len(bottom) + len(right)
    flags[start : start + len(chart)] = True
    return vertices, flags


def build_base_domain(
    kind: DomainKind | str = DomainKind.SQUARE_TOP_CHART,
    phi: ChartFunction | None = None,
    resolution: float = 1 / 64,
) -> ChartedDomain:
    """Build the unperturbed domain Ω.

    Args:
        kind: ``square`` (unit square whose top edge is the chart) or ``disk``.
        phi: Chart height; defaults to Φ ≡ 1. Ignored for the disk.
        resolution: Maximal polyline spacing.

    Returns:
        The base domain.

    Raises:
        ConfigError: If ``resolution`` is not positive.
        GeometryError: If the polyline is not a simple CCW curve.
    """
    kind = DomainKind(kind)
    if not resolution > 0:
        raise ConfigError("resolution", f"must be positive, got {resolution}")

    if kind is DomainKind.UNIT_DISK:
        n = max(8, int(np.ceil(2 * np.pi / resolution)))
        theta = 2 * np.pi * np.arange(n) / n
        vertices = np.column_stack([np.cos(theta), np.sin(theta)])
        _validate(vertices)
        return ChartedDomain(kind, vertices, np.zeros(n, dtype=bool), resolution)

    phi = phi or ChartFunction()
    n = max(1, int(np.ceil(1.0 / resolution)))
    chart_x = np.linspace(1.0, 0.0, n + 1)
    vertices, flags = _square_polyline(chart_x, phi(chart_x), resolution)
    _validate(vertices)
    return ChartedDomain(kind, vertices, flags, resolution, phi=phi)


def build_perturbed_boundary(domain: ChartedDomain, osc: OscillationSpec, eps: float) -> ChartedDomain:
    """Build Ω_ε by replacing the chart with x1 = Φ(x') + ε^a f(x'/ε).

    The chart is sampled at ``x' = j/(k n)`` with at least 16 points per period,
    and the profile is evaluated at the exact cell-local abscissa ``(j mod n)/n``
    so that cell boundaries see f(0) bit for bit.

    Raises:
        ConfigError: If ε is not 1/k or the domain has no chart.
        GeometryError: If the perturbed polyline self-intersects.
    """
    k = cells_from_eps(eps)
    if domain.kind is not DomainKind.SQUARE_TOP_CHART or domain.phi is None:
        raise ConfigError("domain", "only the square with a top chart can be perturbed")
    base = domain.base or domain

    if osc.is_constant:
        return ChartedDomain(
            base.kind,
            base.vertices.copy(),
            base.chart_segments.copy(),
            base.resolution,
            phi=base.phi,
            chart_interval=base.chart_interval,
            oscillation=osc,
            eps=eps,
            base=base,
        )

    per_period = max(MIN_POINTS_PER_PERIOD, int(np.ceil(eps / base.resolution)))
    total = k * per_period
    j = np.arange(total, -1, -1)
    chart_x = j / total
    local = (j % per_period) / per_period
    chart_y = base.phi(chart_x) + eps**osc.a * osc.f(local)

    vertices, flags = _square_polyline(chart_x, chart_y, base.resolution)
    _validate(vertices)
    return ChartedDomain(
        base.kind,
        vertices,
        flags,
        base.resolution,
        phi=base.phi,
        chart_interval=base.chart_interval,
        oscillation=osc,
        eps=eps,
        base=base,
    )


@dataclass(frozen=True)
class ChartLength:
    """Arclength of the oscillating chart and the residual bound check.

    Attributes:
        length: ∫_{U'} √(1 + (Φ' + ε^{a-1} f'(x'/ε))²) dx'.
        rho_max: Max over quadrature points of |√(ε^{2(1-a)} + (ε^{1-a}Φ' + f')²) − |f'||.
        rho_bound_holds: Whether |ρ| ≤ ε^{1-a}(1 + |Φ'|) at every quadrature point.
    """

    length: float
    rho_max: float
    rho_bound_holds: bool


def perturbed_chart_length(phi: ChartFunction, osc: OscillationSpec, eps: float) -> ChartLength:
    k = cells_from_eps(eps)
    scale = eps ** (osc.a - 1.0)

    def integrand(x):
        return np.sqrt(1.0 + (phi.derivative(x) + scale * osc.fprime(x / eps)) ** 2)

    length = integrate_converged(integrand, 0.0, 1.0, panels=16 * k)

    x, _ = gauss_nodes(0.0, 1.0, 16 * k)
    s = eps ** (1.0 - osc.a)
    dphi = phi.derivative(x)
    fp = osc.fprime(x / eps)
    rho = np.sqrt(s**2 + (s * dphi + fp) ** 2) - np.abs(fp)
    holds = bool(np.all(np.abs(rho) <= s * (1.0 + np.abs(dphi)) * (1 + 1e-12)))
    return ChartLength(length=length, rho_max=float(np.max(np.abs(rho))), rho_bound_holds=holds)
