"""
varstring: eigenvalues and eigenfunctions of inhomogeneous strings.

Solves -Psi'' = E rho(x) Psi on [-L, L] with Dirichlet ends by several
cross-checking engines (density and WKB perturbation theory, iterative
refinement, Galerkin and collocation solvers) and extracts the high-energy
asymptotic coefficients of the spectrum.
"""

# report.py reads the version at import time
__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ContinuationUnavailableError,
    ConvergenceError,
    DensityError,
    DomainError,
    ParameterError,
    QuadratureError,
    RootNotFoundError,
    VarStringError,
)
from .density import DensityModel, catalog_model, gottlieb_transform
from .modes import ModeResult
from .wkb_basis import MatrixElementTable, WkbBasis, build_table
from .perturbation import PerturbationSeries, dpt_energy, iwkbpt_energy, wkbpt_energy
from .asymptotics import AsymptoticCoefficients, coefficients_from_spectrum, formula_coefficients
from .spectral import SpectralConfig, horgan_exact, solve_dense, solve_windowed
from .collocation import LsfGrid, lsf_solve
from .iterative import (
    effective_density,
    optimize_trial_density,
    theorem1_iterate,
    theorem2_block,
    theorem3_excited,
)
from .report import EngineReport
from . import utils

__all__ = [
    'VarStringError', 'DomainError', 'ParameterError', 'DensityError', 'QuadratureError',
    'ConvergenceError', 'RootNotFoundError', 'ContinuationUnavailableError', 'ConfigError',
    'DensityModel', 'catalog_model', 'gottlieb_transform', 'ModeResult',
    'WkbBasis', 'MatrixElementTable', 'build_table',
    'PerturbationSeries', 'dpt_energy', 'wkbpt_energy', 'iwkbpt_energy',
    'AsymptoticCoefficients', 'formula_coefficients', 'coefficients_from_spectrum',
    'SpectralConfig', 'solve_dense', 'solve_windowed', 'horgan_exact',
    'LsfGrid', 'lsf_solve',
    'theorem1_iterate', 'theorem2_block', 'theorem3_excited', 'effective_density',
    'optimize_trial_density', 'EngineReport',
    'utils',
]
