"""Massless Dirac operator with an Aharonov-Bohm potential in the plane.

Special functions, Hankel transforms, mode decomposition, the spectral
propagator, closed-form kernels of the squared operator and numerical checks
of the dispersive, Strichartz and multiplier estimates.
"""

from .config import Convention, FluxConfig, q_threshold, select_extension
from .errors import (AccuracyWarning, BandLimitError, ConfigurationError, DiracABError,
                     DomainError, ResolutionError, TruncationError)
from .grids import ModeSpinor, RadialGrid, RadialProfile, SpectralGrid, SpectralProfile
from .modes import ModeSet, SpinorField, decompose, project, reconstruct
from .propagator import BandCutoff, evolve_field, evolve_mode, kernel_F_E, localized_kernel

__version__ = "0.1.0"

__all__ = [
    "Convention", "FluxConfig", "q_threshold", "select_extension",
    "AccuracyWarning", "BandLimitError", "ConfigurationError", "DiracABError",
    "DomainError", "ResolutionError", "TruncationError",
    "ModeSpinor", "RadialGrid", "RadialProfile", "SpectralGrid", "SpectralProfile",
    "ModeSet", "SpinorField", "decompose", "project", "reconstruct",
    "BandCutoff", "evolve_field", "evolve_mode", "kernel_F_E", "localized_kernel",
]
