"""Meshless multiquadric RBF collocation solver for the Richards equation.

The Kirchhoff transform turns the suction-form equation into
``A u_t - lap(u) - B u_z = 0``, which is discretised with local
multiquadric stencils, backward Euler and Picard iteration.
"""
__version__ = "0.1.0"

from .config import ScenarioConfig, load_config, parse_config
from .constitutive import (SOILS, KirchhoffCoefficients, SoilParams, coefficients,
                           get_soil, kirchhoff, kirchhoff_inverse, moisture_content,
                           relative_permeability, saturation_from_suction,
                           suction_from_saturation)
from .metrics import ComparisonReport, regrid_linear, rel_l1, rmse, total_mass
from .oracle_fd import FdConfig, solve_fd_1d
from .pointset import NodeSet, Stencil, build_stencils, grid_1d, grid_2d
from .timestepper import (KirchhoffField, PicardReport, initial_field, picard_step,
                          run_transient)

__all__ = [
    "ComparisonReport", "FdConfig", "KirchhoffCoefficients", "KirchhoffField",
    "NodeSet", "PicardReport", "SOILS", "ScenarioConfig", "SoilParams", "Stencil",
    "build_stencils", "coefficients", "get_soil", "grid_1d", "grid_2d",
    "initial_field", "kirchhoff", "kirchhoff_inverse", "load_config",
    "moisture_content", "parse_config", "picard_step", "regrid_linear", "rel_l1",
    "relative_permeability", "rmse", "run_transient", "saturation_from_suction",
    "solve_fd_1d", "suction_from_saturation", "total_mass",
]
