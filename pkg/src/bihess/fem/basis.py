"""Lagrange bases of degree k on the reference triangle (0,0), (1,0), (0,1)."""
from functools import lru_cache

import numpy as np

from ..errors import InvalidArgumentError
from ..mesh.triangulation import LOCAL_EDGES

SUPPORTED_DEGREES = (2, 3, 4)


def monomial_exponents(degree):
    return [(p, d - p) for d in range(degree + 1) for p in range(d, -1, -1)]


def lattice_nodes(k):
    """Barycentric multi-indices (times k) of the local nodes.

    Order: the three vertices, then ``k-1`` nodes on each local edge (edge i
    is opposite vertex i, traversed from ``LOCAL_EDGES[i][0]``), then interior
    nodes.
    """
    nodes = [tuple(k * np.eye(3, dtype=int)[i]) for i in range(3)]
    for a, b in LOCAL_EDGES:
        for s in range(1, k):
            m = [0, 0, 0]
            m[a], m[b] = k - s, s
            nodes.append(tuple(m))
    for i in range(1, k):
        for j in range(1, k - i):
            nodes.append((k - i - j, i, j))
    return np.array(nodes, dtype=int)


def _monomial_table(ref_pts, exps):
    """Values, gradients and Hessians of monomials xi^p eta^q at ref_pts."""
    x = ref_pts[:, 0][:, None]
    y = ref_pts[:, 1][:, None]
    p = np.array([e[0] for e in exps])[None, :]
    q = np.array([e[1] for e in exps])[None, :]

    def pw(base, e):
        # base**e with 0**negative treated as 0 (the coefficient kills it anyway)
        out = np.where(e >= 0, base ** np.maximum(e, 0), 0.0)
        return out

    val = pw(x, p) * pw(y, q)
    dx = p * pw(x, p - 1) * pw(y, q)
    dy = q * pw(x, p) * pw(y, q - 1)
    dxx = p * (p - 1) * pw(x, p - 2) * pw(y, q)
    dxy = p * q * pw(x, p - 1) * pw(y, q - 1)
    dyy = q * (q - 1) * pw(x, p) * pw(y, q - 2)
    grad = np.stack([dx, dy], axis=-1)
    hess = np.stack([np.stack([dxx, dxy], -1), np.stack([dxy, dyy], -1)], -2)
    return val, grad, hess


class ReferenceElement:
    def __init__(self, k):
        if k not in SUPPORTED_DEGREES:
            raise InvalidArgumentError(f"degree must be one of {SUPPORTED_DEGREES}, got {k}")
        self.k = k
        self.multi = lattice_nodes(k)
        self.bary = self.multi / k
        self.ref_nodes = self.bary[:, 1:]
        self.n_basis = len(self.multi)
        self.exps = monomial_exponents(k)
        vander, _, _ = _monomial_table(self.ref_nodes, self.exps)
        # columns of coeffs are the basis functions in the monomial basis
        self.coeffs = np.linalg.inv(vander)

    def tabulate(self, ref_pts):
        """Basis values (Q, nb), gradients (Q, nb, 2) and Hessians (Q, nb, 2, 2)."""
        ref_pts = np.atleast_2d(np.asarray(ref_pts, dtype=float))
        val, grad, hess = _monomial_table(ref_pts, self.exps)
        C = self.coeffs
        return (
            val @ C,
            np.einsum("qmd,mi->qid", grad, C),
            np.einsum("qmde,mi->qide", hess, C),
        )


@lru_cache(maxsize=None)
def reference_element(k):
    return ReferenceElement(k)


def eval_basis(k, bary):
    """Values, gradients and Hessians (reference coordinates) at one barycentric point."""
    bary = np.asarray(bary, dtype=float)
    if abs(bary.sum() - 1.0) > 1e-12:
        raise InvalidArgumentError("barycentric coordinates must sum to 1")
    v, g, h = reference_element(k).tabulate(bary[None, 1:])
    return v[0], g[0], h[0]
