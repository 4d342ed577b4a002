"""Orthogonal pairs of Cartan subalgebras in sl(6, C), numerically.

Configurations of rank-1 projectors satisfying the reduced relation systems,
their moduli invariants and Zariski tangent dimensions, and predictor-
corrector continuation of the real four-dimensional family of mutually
unbiased bases / 6 x 6 complex Hadamard matrices through the standard pair.
"""

from . import config, continuation, exact, invariants, linalg, relations, tangent

__all__ = [
    "config",
    "continuation",
    "exact",
    "invariants",
    "linalg",
    "relations",
    "tangent",
]

__version__ = "0.1.0"
