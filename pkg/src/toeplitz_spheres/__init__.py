"""Quantum odd spheres realised as functions on a Toeplitz-type groupoid."""

from .algebra import AlgebraElement, adjoint, convolve
from .groupoid import GroupoidElement, compose, inverse
from .represent import ReprConfig, to_matrix
from .spheres import build_generators

__all__ = [
    "AlgebraElement",
    "GroupoidElement",
    "ReprConfig",
    "adjoint",
    "build_generators",
    "compose",
    "convolve",
    "inverse",
    "to_matrix",
]
