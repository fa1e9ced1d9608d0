"""Galerkin solvers and verification tooling for steady, fully developed
generalized-Newtonian flow in curved pipes.

Public surface: cross-section construction, the power-law stress algebra,
the curved-pipe operators, the mixed solvers (full system and flat
sigma-forced approximation), the explicit constant tables, and the
verification harness.
"""

from .constants import (DeanTable, KappaTable, dean_constants, kappa_constants,
                        sigma_alpha_window, sigma_constants, sobolev_constant)
from .dean import (SigmaSpec, dean_scaling_study, delta_approx_study,
                   solve_dean)
from .geometry import CrossSection, build_cross_section
from .meshing import Mesh, disk_mesh, read_mesh, rectangle_mesh, write_mesh, write_vtk
from .solver import (FlowParams, SolveReport, SolverOptions, axial_only_solve,
                     check_pressure_estimate, solve_full)
from .tensors import (PowerLawModel, check_properties,
                      check_thickening_properties, check_thinning_properties,
                      stress, stress_jacobian)

__version__ = "0.1.0"

__all__ = [
    "CrossSection", "DeanTable", "FlowParams", "KappaTable", "Mesh",
    "PowerLawModel", "SigmaSpec", "SolveReport", "SolverOptions",
    "axial_only_solve", "build_cross_section", "check_pressure_estimate",
    "check_properties", "check_thickening_properties",
    "check_thinning_properties", "dean_constants", "dean_scaling_study",
    "delta_approx_study", "disk_mesh", "kappa_constants", "read_mesh",
    "rectangle_mesh", "sigma_alpha_window", "sigma_constants",
    "sobolev_constant", "solve_dean", "solve_full", "stress",
    "stress_jacobian", "write_mesh", "write_vtk",
]
