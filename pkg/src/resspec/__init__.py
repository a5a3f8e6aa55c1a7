"""Residual subspaces, residue shifts and spectral decompositions for split reductive groups."""
from __future__ import annotations

from .analytic import TestFunction, get_backend, random_pair
from .engine import ResidueEngine, contour_integral, y_mass, y_masses
from .residual import (AffineSubspace, NilpotentOrbit, enumerate_residual, load_orbit_table,
                       nilpotent_orbits)
from .rootsys import RootSystem, build_root_system, enumerate_weyl
from .spectrum import Decomposition, direct_inner, spectral_term, verify_decomposition

__version__ = "0.1.0"

__all__ = [
    "AffineSubspace", "Decomposition", "NilpotentOrbit", "ResidueEngine", "RootSystem", "TestFunction",
    "build_root_system", "contour_integral", "direct_inner", "enumerate_residual", "enumerate_weyl",
    "get_backend", "load_orbit_table", "nilpotent_orbits", "random_pair", "spectral_term",
    "verify_decomposition", "y_mass", "y_masses", "__version__",
]
