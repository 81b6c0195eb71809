"""Exterior Helmholtz solver, far-field tables and the sphere series oracle."""

from .series import (
    sphere_series_amplitude,
    sphere_series_cross_section,
    sphere_series_field,
    sphere_t_matrix,
    truncation_degree,
)
from .solver import (
    BoundaryCondition,
    BoundaryDensity,
    ExteriorSolver,
    ScatterProblem,
    far_field_amplitude,
    recommended_order,
    solve_exterior,
)
from .table import CONVENTION, FarFieldTable, compute_far_field_table, sphere_far_field_table

__all__ = [
    "BoundaryCondition",
    "BoundaryDensity",
    "CONVENTION",
    "ExteriorSolver",
    "FarFieldTable",
    "ScatterProblem",
    "compute_far_field_table",
    "far_field_amplitude",
    "recommended_order",
    "solve_exterior",
    "sphere_far_field_table",
    "sphere_series_amplitude",
    "sphere_series_cross_section",
    "sphere_series_field",
    "sphere_t_matrix",
    "truncation_degree",
]
