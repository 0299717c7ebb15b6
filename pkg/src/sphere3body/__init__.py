"""Relative equilibria of three gravitating spheres of equal density.

The package maps out every configuration in which three rigid spheres,
possibly resting on one another, rotate rigidly about their common maximum
inertia axis: existence windows in total angular momentum, energetic
stability, the bifurcations connecting the families, and parameter-triangle
charts of the qualitative regimes.  A brute-force scan of the amended
potential provides an independent check of the closed-form solvers.
"""

from .model import (
    Configuration,
    MassTriple,
    RadiiTriple,
    SystemParams,
    amended_potential,
    masses_from_radii,
    moment_of_inertia,
    potential,
    radii_from_masses,
)
from .equilibria import EquilibriumClass, EquilibriumRecord, enumerate_all

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "MassTriple",
    "RadiiTriple",
    "SystemParams",
    "EquilibriumClass",
    "EquilibriumRecord",
    "amended_potential",
    "enumerate_all",
    "masses_from_radii",
    "moment_of_inertia",
    "potential",
    "radii_from_masses",
    "__version__",
]
