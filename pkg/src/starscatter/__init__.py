"""Acoustic scattering by starlike obstacles in three dimensions.

Forward solves by combined-field boundary integral equations, scattering
matrices and cross sections, the scattering phase and heat trace, and
recovery of the radial function from cross-section data.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import StarScatterError
from .forward import (
    BoundaryCondition,
    BoundaryDensity,
    ExteriorSolver,
    FarFieldTable,
    ScatterProblem,
    compute_far_field_table,
    far_field_amplitude,
    solve_exterior,
    sphere_series_amplitude,
    sphere_series_cross_section,
)
from .geometry import RadialShape, SurfaceFrame, eval_radius, surface_frame, volume
from .inverse import (
    ReconstructionConfig,
    distinguishability,
    misfit_and_gradient,
    reconstruct_shape,
    synthesize_cross_section_data,
)
from .mathcore import SphereGrid, build_sphere_grid, legendre_p, real_sph_harm, sph_bessel
from .smatrix import CrossSectionData, SMatrixDisc, build_smatrix, cross_section, cross_sections, identity_residuals
from .trace import (
    HeatTraceFit,
    PhaseSamples,
    heat_trace_and_a0,
    phase_derivative_det,
    sphere_scattering_phase,
)

__all__ = [
    "BoundaryCondition",
    "BoundaryDensity",
    "CrossSectionData",
    "ExteriorSolver",
    "FarFieldTable",
    "HeatTraceFit",
    "PhaseSamples",
    "RadialShape",
    "ReconstructionConfig",
    "SMatrixDisc",
    "ScatterProblem",
    "SphereGrid",
    "StarScatterError",
    "SurfaceFrame",
    "build_smatrix",
    "build_sphere_grid",
    "compute_far_field_table",
    "cross_section",
    "cross_sections",
    "distinguishability",
    "eval_radius",
    "far_field_amplitude",
    "heat_trace_and_a0",
    "identity_residuals",
    "legendre_p",
    "misfit_and_gradient",
    "phase_derivative_det",
    "real_sph_harm",
    "reconstruct_shape",
    "solve_exterior",
    "sph_bessel",
    "sphere_scattering_phase",
    "sphere_series_amplitude",
    "sphere_series_cross_section",
    "surface_frame",
    "synthesize_cross_section_data",
    "volume",
]
