"""Spin-0 and spin-1/2 Hamiltonians on curved surfaces in electromagnetic fields.

Modules
-------
geometry  surfaces, scale factors, curvatures and the geometric potential
fields    vector potentials, magnetic fields, Zeeman and spin-orbit terms
lattice   grids, Peierls links and Hermitian operator assembly
spectra   dense and Lanczos eigensolvers, convergence fits
oracle    closed-form and brute-force references
verify    verification suites
cli       ``curvham`` command line entry point
"""

from .errors import (
    ConfigurationError,
    ConvergenceError,
    CurvhamError,
    DimensionError,
    InvalidGaugeFunctionError,
    MissingFieldError,
    SingularPointError,
    UnsupportedConfigurationError,
)
from .fields import FieldConfig, FluxLine, CustomTangential, MagneticFieldSpec, ScalarPotential, SOCVector, UniformB
from .geometry import SurfaceKind, SurfaceSpec
from .lattice import LatticeGrid, SurfaceOperator, assemble_pauli, assemble_spin0, build_grid, link_phases
from .spectra import SpectrumResult, eigen_lowest
from .units import NATURAL, Constants

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ConvergenceError",
    "CurvhamError",
    "DimensionError",
    "InvalidGaugeFunctionError",
    "MissingFieldError",
    "SingularPointError",
    "UnsupportedConfigurationError",
    "FieldConfig",
    "FluxLine",
    "CustomTangential",
    "MagneticFieldSpec",
    "ScalarPotential",
    "SOCVector",
    "UniformB",
    "SurfaceKind",
    "SurfaceSpec",
    "LatticeGrid",
    "SurfaceOperator",
    "assemble_pauli",
    "assemble_spin0",
    "build_grid",
    "link_phases",
    "SpectrumResult",
    "eigen_lowest",
    "NATURAL",
    "Constants",
]
