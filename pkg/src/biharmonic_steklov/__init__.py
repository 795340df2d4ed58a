"""Spectra of the biharmonic Steklov plate problem on balls and planar domains."""

from .params import AdmissibilityError, PlateParams, SolverError, Spectrum

__all__ = ["AdmissibilityError", "PlateParams", "SolverError", "Spectrum"]
__version__ = "0.1.0"
