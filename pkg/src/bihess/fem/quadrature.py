"""Quadrature rules on the reference triangle and on [0, 1]."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from ..errors import InvalidArgumentError

MAX_DEGREE = 12


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # barycentric (Q, 3) for triangles, abscissae (Q,) for edges
    weights: np.ndarray
    exactness_degree: int

    @property
    def ref_points(self):
        """Reference (xi, eta) coordinates of a triangle rule."""
        return self.points[:, 1:]


@lru_cache(maxsize=None)
def _triangle_rule(degree):
    # collapsed (Duffy) product of Gauss-Jacobi(1,0) and Gauss-Legendre
    m = max(1, -(-(degree + 1) // 2))
    xj, wj = roots_jacobi(m, 1.0, 0.0)
    xl, wl = np.polynomial.legendre.leggauss(m)
    u = (1 + xj) / 2
    wu = wj / 4
    v = (1 + xl) / 2
    wv = wl / 2
    U, Vv = np.meshgrid(u, v, indexing="ij")
    xi = U.ravel()
    eta = (Vv * (1 - U)).ravel()
    w = np.outer(wu, wv).ravel()
    bary = np.column_stack([1 - xi - eta, xi, eta])
    return QuadratureRule(bary, w, 2 * m - 1)


@lru_cache(maxsize=None)
def _edge_rule(degree):
    m = max(1, -(-(degree + 1) // 2))
    x, w = np.polynomial.legendre.leggauss(m)
    return QuadratureRule((1 + x) / 2, w / 2, 2 * m - 1)


def quadrature_for(kind, degree_needed):
    """Rule of exactness at least ``degree_needed`` on the reference element or edge."""
    if not 0 <= int(degree_needed) <= MAX_DEGREE:
        raise InvalidArgumentError(f"quadrature degree must lie in [0, {MAX_DEGREE}]")
    if kind == "element":
        return _triangle_rule(int(degree_needed))
    if kind == "edge":
        return _edge_rule(int(degree_needed))
    raise InvalidArgumentError(f"unknown quadrature kind {kind!r}")
