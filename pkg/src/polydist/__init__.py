"""
Polyconvex stored energies over simplicial meshes, constrained to classes
of maps with integrable distortion, with injectivity and distortion audits.
"""

__version__ = "0.1.0"

from . import tensor, exponents, energy, mesh, injectivity, admissible, sequences, minimize  # noqa: E402

__all__ = [
    "tensor",
    "exponents",
    "energy",
    "mesh",
    "injectivity",
    "admissible",
    "sequences",
    "minimize",
]
