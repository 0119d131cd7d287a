"""Canonical perturbation machinery of the J2 main problem.

Charts and geometry (:mod:`~j2lab.elements`), Hamiltonian term fields
(:mod:`~j2lab.model`), generating functions (:mod:`~j2lab.generators`),
the numeric Lie-transform engine (:mod:`~j2lab.lie`), propagation and
averaging (:mod:`~j2lab.flows`), and the command line front end
(:mod:`~j2lab.cli`).
"""

from .elements import (
    C20_EARTH,
    CartesianState,
    DelaunayState,
    ModelParams,
    OrbitGeometry,
    PolarNodalState,
    geometry,
    solve_kepler,
)
from .model import FamilyTag, ScalarField
from .generators import A1Mode, GeneratorChoice
from .lie import BracketConfig, TransformSpec

__all__ = [
    "A1Mode",
    "BracketConfig",
    "C20_EARTH",
    "CartesianState",
    "DelaunayState",
    "FamilyTag",
    "GeneratorChoice",
    "ModelParams",
    "OrbitGeometry",
    "PolarNodalState",
    "ScalarField",
    "TransformSpec",
    "geometry",
    "solve_kepler",
]
