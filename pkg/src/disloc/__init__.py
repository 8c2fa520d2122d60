"""Harmonic oscillator with a finite step at the origin: exact spectrum,
piecewise eigenfunctions, Wronskian deformations and a grid oracle."""
from .model import PotentialSpec
from .spectrum import Eigenvalue, find_spectrum_general, full_spectrum_hermite_case, level, levels
from .states import PiecewiseState, eigenstate
from .darboux import DeformationSpec, DeformedSystem, crum_system, krein_adler_system, strict_iso_system
from .oracle import GridConfig, grid_spectrum

__version__ = "0.1.0"

__all__ = [
    "PotentialSpec", "Eigenvalue", "find_spectrum_general", "full_spectrum_hermite_case", "level", "levels",
    "PiecewiseState", "eigenstate", "DeformationSpec", "DeformedSystem", "crum_system",
    "krein_adler_system", "strict_iso_system", "GridConfig", "grid_spectrum",
]
