"""P1 energies, boundary norms and minimal trace-quotient solvers."""

from .energy import (
    EnergyFunctional,
    RayleighQuotient,
    assemble_energy,
    boundary_lp_norm,
    boundary_mass_matrix,
    boundary_power,
    pullback_energy,
    pullback_functional,
    shape_gradients,
)
from .solvers import (
    SolverConfig,
    TraceEigenpair,
    pinned_nodes,
    solve_p2,
    solve_p_general,
    write_eigenpair,
)

__all__ = [
    "EnergyFunctional",
    "RayleighQuotient",
    "SolverConfig",
    "TraceEigenpair",
    "assemble_energy",
    "boundary_lp_norm",
    "boundary_mass_matrix",
    "boundary_power",
    "pinned_nodes",
    "pullback_energy",
    "pullback_functional",
    "shape_gradients",
    "solve_p2",
    "solve_p_general",
    "write_eigenpair",
]
