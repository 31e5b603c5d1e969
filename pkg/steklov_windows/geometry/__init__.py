"""Charted domains, oscillating boundaries and their triangulations."""

from .domain import (
    ChartedDomain,
    ChartFunction,
    ChartLength,
    DomainKind,
    OscillationSpec,
    ProfileKind,
    build_base_domain,
    build_perturbed_boundary,
    cells_from_eps,
    perturbed_chart_length,
)
from .export import read_off, write_off, write_vtu
from .mesh import TriMesh, generate_mesh, refine_mesh

__all__ = [
    "ChartFunction",
    "ChartLength",
    "ChartedDomain",
    "DomainKind",
    "OscillationSpec",
    "ProfileKind",
    "TriMesh",
    "build_base_domain",
    "build_perturbed_boundary",
    "cells_from_eps",
    "generate_mesh",
    "perturbed_chart_length",
    "read_off",
    "refine_mesh",
    "write_off",
    "write_vtu",
]
