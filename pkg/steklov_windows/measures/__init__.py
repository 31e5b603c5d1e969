"""Boundary measures dS, μ_ε, μ*, ν_ε, ν* and their convergence diagnostics."""

from .boundary import (
    DiscreteBoundaryMeasure,
    MeasureKind,
    mu_eps_measure,
    mu_star_measure,
    surface_measure,
)
from .diagnostics import (
    MeasureRow,
    WeakMeasureResult,
    arc_measure_errors,
    best_reflection_difference,
    boundary_correspondence,
    boundary_distance,
    pullback_boundary_values,
    pullback_window,
    pulled_back_measure,
    small_value_mass,
    symmetric_difference_measure,
    weak_measure_test,
    write_measures_csv,
)

__all__ = [
    "DiscreteBoundaryMeasure",
    "MeasureKind",
    "MeasureRow",
    "WeakMeasureResult",
    "arc_measure_errors",
    "best_reflection_difference",
    "boundary_correspondence",
    "boundary_distance",
    "mu_eps_measure",
    "mu_star_measure",
    "pullback_boundary_values",
    "pullback_window",
    "pulled_back_measure",
    "small_value_mass",
    "surface_measure",
    "symmetric_difference_measure",
    "weak_measure_test",
    "write_measures_csv",
]
