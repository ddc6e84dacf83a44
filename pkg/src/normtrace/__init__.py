"""Finite-field workbench for norm-trace curve intersections, cubic
surface classification, and one-point AG code weight spectra."""

__version__ = "0.1.0"

from .gf import Element, FieldTower, Level, build_tower, tower_for_q

__all__ = [
    "Element",
    "FieldTower",
    "Level",
    "build_tower",
    "tower_for_q",
    "__version__",
]
