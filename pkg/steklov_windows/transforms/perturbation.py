"""The boundary-straightening map T_ε : Ω_ε → Ω and its Jacobians.

T_ε(x', x1) = (x', x1 − ε^a f(x'/ε) φ_ε(x)), so only the height moves. The cutoff
φ_ε = S(1 − d/√ε) uses the vertical depth d below the chart graph, measured from
Φ − ε^a·max(0, −min f) so that the whole perturbed chart lies on the plateau φ_ε = 1.

Code map:
    smoothstep()                     S(t) = 3t² − 2t³ clamped to [0, 1]
    PerturbationMap                  ε, profile and chart; forward/inverse/jacobian
    JacobianBundle                   DT, J and (on the chart) the tangential Jacobian
    cutoff_phi()                     φ_ε at points
    apply_T_eps()                    Forward map, with diffeomorphism check
    apply_T_eps_inverse()            Vectorized safeguarded Newton in x1
    jacobian_at()                    Single-point bundle
    tangential_jacobian_inverse()    Density of μ_ε with respect to dS on the chart
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import ConfigError, MapError
from ..geometry.domain import ChartedDomain, OscillationSpec, cells_from_eps

SMOOTHSTEP_SLOPE = 1.5
INVERSE_TOL = 1e-13
INVERSE_MAX_ITER = 100


def smoothstep(t) -> np.ndarray:
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def smoothstep_derivative(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    return np.where(inside, 6.0 * t * (1.0 - t), 0.0)


@dataclass(frozen=True)
class JacobianBundle:
    """Differential of T_ε at one point.

    ``DT`` uses the storage order (x', x1) for rows and columns, so the only
    non-trivial row is the second one.
    """

    DT: np.ndarray
    J: float
    Jtau: float | None = None


@dataclass(frozen=True, eq=False)
class PerturbationMap:
    """T_ε for the base domain ``domain``, profile ``osc`` and period ``eps``."""

    domain: ChartedDomain
    osc: OscillationSpec
    eps: float

    def __post_init__(self):
        cells_from_eps(self.eps)
        if self.domain.phi is None:
            raise ConfigError("domain", "the perturbation map needs a charted domain")
        if self.domain.is_perturbed:
            object.__setattr__(self, "domain", self.domain.base)

    @property
    def cutoff_width(self) -> float:
        return float(np.sqrt(self.eps))

    @property
    def amplitude(self) -> float:
        return self.eps**self.osc.a

    @property
    def gradient_constant(self) -> float:
        """C in |∇φ_ε| ≤ C ε^{-1/2}."""
        return SMOOTHSTEP_SLOPE * float(np.sqrt(1.0 + self.domain.phi.max_slope**2))

    @cached_property
    def plateau_shift(self) -> float:
        return self.amplitude * max(0.0, -self.osc.inf_f)

    @cached_property
    def min_det(self) -> float:
        """Lower bound of det DT_ε over Ω_ε: 1 − (3/2) ε^{a−1/2} max f⁺."""
        return 1.0 - self.amplitude * max(0.0, self.osc.sup_f) * SMOOTHSTEP_SLOPE / self.cutoff_width

    @property
    def is_identity(self) -> bool:
        return self.osc.is_constant

    def ensure_diffeomorphic(self) -> None:
        if self.min_det <= 0:
            raise MapError(
                f"T_eps is not a diffeomorphism for a={self.osc.a}, eps={self.eps} (det bound {self.min_det:.3g})"
            )

    def _depth_coordinate(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return t = 1 − d/√ε (unclamped) and x'."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        xp = points[:, 0]
        depth = self.domain.phi(xp) - self.plateau_shift - points[:, 1]
        return 1.0 - np.maximum(depth, 0.0) / self.cutoff_width, xp

    def cutoff(self, points: np.ndarray) -> np.ndarray:
        t, _ = self._depth_coordinate(points)
        return smoothstep(t)

    def cutoff_gradient(self, points: np.ndarray) -> np.ndarray:
        t, xp = self._depth_coordinate(points)
        slope = smoothstep_derivative(t) / self.cutoff_width
        return np.column_stack([-slope * self.domain.phi.derivative(xp), slope])

    def displacement(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self.amplitude * self.osc.f(points[:, 0] / self.eps) * self.cutoff(points)

    def forward(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.is_identity:
            return points.copy()
        self.ensure_diffeomorphic()
        out = points.copy()
        out[:, 1] = points[:, 1] - self.displacement(points)
        return out

    def inverse(self, points: np.ndarray) -> np.ndarray:
        """Solve x1 − c φ_ε(y', x1) = y1 with c = ε^a f(y'/ε) for every point.

        The left side is strictly increasing in x1 when the map is a
        diffeomorphism, and the root lies between y1 and y1 + c.
        """
        y = np.atleast_2d(np.asarray(points, dtype=float))
        if self.is_identity:
            return y.copy()
        self.ensure_diffeomorphic()

        c = self.amplitude * self.osc.f(y[:, 0] / self.eps)
        lo = y[:, 1] + np.minimum(c, 0.0)
        hi = y[:, 1] + np.maximum(c, 0.0)
        trial = y.copy()

        def residual(x1):
            trial[:, 1] = x1
            return x1 - c * self.cutoff(trial) - y[:, 1], 1.0 - c * self.cutoff_gradient(trial)[:, 1]

        g_lo, _ = residual(lo)
        g_hi, _ = residual(hi)
        if np.any(g_lo > INVERSE_TOL) or np.any(g_hi < -INVERSE_TOL):
            raise MapError("inverse of T_eps has no root in its bracket")

        x1 = y[:, 1] + c * self.cutoff(y)
        for _ in range(INVERSE_MAX_ITER):
            g, dg = residual(x1)
            if np.all(np.abs(g) <= INVERSE_TOL):
                break
            hi = np.where(g > 0, x1, hi)
            lo = np.where(g < 0, x1, lo)
            step = x1 - g / dg
            outside = (step <= lo) | (step >= hi) | ~np.isfinite(step)
            x1 = np.where(np.abs(g) <= INVERSE_TOL, x1, np.where(outside, 0.5 * (lo + hi), step))
        else:
            raise MapError("inverse of T_eps did not converge")

        out = y.copy()
        out[:, 1] = x1
        return out

    def jacobian(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return DT (N, 2, 2) and J (N,) at points of Ω_ε.

        DT = I − ε^a f ∇φ_ε-row − ε^{a−1} φ_ε f' e1-row, placed in the height row.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n = len(points)
        dt = np.zeros((n, 2, 2))
        dt[:, 0, 0] = 1.0
        dt[:, 1, 1] = 1.0
        if self.is_identity:
            return dt, np.ones(n)
        y = points[:, 0] / self.eps
        f = self.osc.f(y)
        fp = self.osc.fprime(y)
        phi = self.cutoff(points)
        grad = self.cutoff_gradient(points)
        dt[:, 1, 0] = -self.eps ** (self.osc.a - 1.0) * fp * phi - self.amplitude * f * grad[:, 0]
        dt[:, 1, 1] = 1.0 - self.amplitude * f * grad[:, 1]
        det = dt[:, 1, 1].copy()
        if np.any(det <= 0):
            raise MapError("det DT_eps <= 0 at a sampled point")
        return dt, det

    def chart_normal(self, xp: np.ndarray) -> np.ndarray:
        """Outer unit normal of the perturbed chart over x'."""
        xp = np.asarray(xp, dtype=float)
        slope = self.domain.phi.derivative(xp) + self.eps ** (self.osc.a - 1.0) * self.osc.fprime(xp / self.eps)
        n = np.column_stack([-slope, np.ones_like(slope)])
        return n / np.linalg.norm(n, axis=1)[:, None]


def cutoff_phi(points: np.ndarray, eps: float, domain: ChartedDomain) -> np.ndarray:
    """φ_ε at points; equal to 1 on the chart and 0 at vertical depth ≥ √ε below it.

    The depth is measured straight down from the chart, so φ_ε = 0 on the whole
    bottom wall and on the side walls below depth √ε. Near the top corners the
    side walls see 0 < φ_ε ≤ 1, but T_ε only moves points vertically and so maps
    each side wall into itself.
    """
    return PerturbationMap(domain, OscillationSpec.flat(), eps).cutoff(points)


def apply_T_eps(pmap: PerturbationMap, points: np.ndarray) -> np.ndarray:
    return pmap.forward(points)


def apply_T_eps_inverse(pmap: PerturbationMap, points: np.ndarray) -> np.ndarray:
    return pmap.inverse(points)


def jacobian_at(pmap: PerturbationMap, point, normal=None) -> JacobianBundle:
    """Jacobian bundle at one point of Ω_ε.

    The tangential Jacobian J_τ = |DT^{-T} n|·J is filled in when ``normal`` is
    given or when the point lies on the perturbed chart, whose normal is then used.
    """
    point = np.asarray(point, dtype=float).reshape(1, 2)
    dt, det = pmap.jacobian(point)
    if normal is None:
        xp = point[:, 0]
        chart_height = pmap.domain.phi(xp) + pmap.amplitude * pmap.osc.f(xp / pmap.eps)
        if 0.0 <= xp[0] <= 1.0 and abs(point[0, 1] - chart_height[0]) <= 1e-12:
            normal = pmap.chart_normal(xp)[0]
    jtau = None
    if normal is not None:
        n = np.asarray(normal, dtype=float)
        n = n / np.linalg.norm(n)
        jtau = float(np.linalg.norm(np.linalg.solve(dt[0].T, n)) * det[0])
    return JacobianBundle(DT=dt[0], J=float(det[0]), Jtau=jtau)


def tangential_jacobian_inverse(pmap: PerturbationMap, xp) -> np.ndarray:
    """J_τ T_ε^{-1} on the base chart: perturbed over flat arclength element."""
    xp = np.asarray(xp, dtype=float)
    dphi = pmap.domain.phi.derivative(xp)
    perturbed = np.sqrt(1.0 + (dphi + pmap.eps ** (pmap.osc.a - 1.0) * pmap.osc.fprime(xp / pmap.eps)) ** 2)
    return perturbed / np.sqrt(1.0 + dphi**2)
