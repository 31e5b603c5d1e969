"""The map T_ε, its Jacobians, and the homogenized weight m."""

from .perturbation import (
    JacobianBundle,
    PerturbationMap,
    apply_T_eps,
    apply_T_eps_inverse,
    cutoff_phi,
    jacobian_at,
    smoothstep,
    tangential_jacobian_inverse,
)
from .weight import (
    WeakStarRow,
    WeightField,
    homogenized_weight,
    homogenized_weights,
    limit_density,
    weakstar_test,
    weight_field,
    write_weakstar_csv,
)

__all__ = [
    "JacobianBundle",
    "PerturbationMap",
    "WeakStarRow",
    "WeightField",
    "apply_T_eps",
    "apply_T_eps_inverse",
    "cutoff_phi",
    "homogenized_weight",
    "homogenized_weights",
    "jacobian_at",
    "limit_density",
    "smoothstep",
    "tangential_jacobian_inverse",
    "weakstar_test",
    "weight_field",
    "write_weakstar_csv",
]
