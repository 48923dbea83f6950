from .basis import ReferenceElement, eval_basis, lattice_nodes, reference_element
from .function import FeFunction, interpolate, read_coefficients, write_coefficients
from .quadrature import QuadratureRule, quadrature_for
from .space import EDGE, INTERIOR, VERTEX, FeSpace, build_space

__all__ = [
    "EDGE",
    "INTERIOR",
    "VERTEX",
    "FeFunction",
    "FeSpace",
    "QuadratureRule",
    "ReferenceElement",
    "build_space",
    "eval_basis",
    "interpolate",
    "lattice_nodes",
    "quadrature_for",
    "read_coefficients",
    "reference_element",
    "write_coefficients",
]
