"""Admissible boundary windows and the alternating optimization."""

from .optimize import (
    ArcOracle,
    OptimizationTrace,
    contiguous_arc_oracle,
    optimize_window,
    solve_limit_problem,
)
from .window import (
    Window,
    bathtub_update,
    edge_averages,
    initial_arc,
    reflect_window,
    write_window,
)

__all__ = [
    "ArcOracle",
    "OptimizationTrace",
    "Window",
    "bathtub_update",
    "contiguous_arc_oracle",
    "edge_averages",
    "initial_arc",
    "optimize_window",
    "reflect_window",
    "solve_limit_problem",
    "write_window",
]
