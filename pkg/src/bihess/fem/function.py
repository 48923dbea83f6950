"""Finite element functions: interpolation, point evaluation, text export."""
from dataclasses import dataclass

import numpy as np

from ..errors import EvaluationError


@dataclass(frozen=True, eq=False)
class FeFunction:
    space: object
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.space.n_dofs,):
            raise ValueError(f"expected {self.space.n_dofs} coefficients, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def __add__(self, other):
        return FeFunction(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return FeFunction(self.space, self.coeffs - other.coeffs)

    def __mul__(self, alpha):
        return FeFunction(self.space, alpha * self.coeffs)

    __rmul__ = __mul__

    def element_coeffs(self, elements=None):
        dofs = self.space.elem_dofs if elements is None else self.space.elem_dofs[elements]
        return self.coeffs[dofs]

    def at_reference(self, ref_pts, order=0, elements=None):
        """Value (T,Q), gradient (T,Q,2) or Hessian (T,Q,2,2) at reference points on every element."""
        c = self.element_coeffs(elements)
        val, grad, hess = self.space.physical_basis(ref_pts, elements)
        if order == 0:
            return c @ val.T
        if order == 1:
            return np.einsum("ti,tqid->tqd", c, grad)
        if order == 2:
            return np.einsum("ti,tqide->tqde", c, hess)
        raise ValueError("derivative order must be 0, 1 or 2")

    def evaluate(self, points, order=0):
        """Point evaluation; ``order`` selects value, gradient or Hessian."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        elems, ref = self.space.locate(points)
        val, grad, hess = self.space.ref.tabulate(ref)
        c = self.coeffs[self.space.elem_dofs[elems]]
        if order == 0:
            return np.einsum("pi,pi->p", c, val)
        _, _, inv = self.space.jacobians()
        inv = inv[elems]
        if order == 1:
            g = np.einsum("pia,pab->pib", grad, inv)
            return np.einsum("pi,pib->pb", c, g)
        if order == 2:
            h = np.einsum("pab,piac,pcd->pibd", inv, hess, inv)
            return np.einsum("pi,pibd->pbd", c, h)
        raise ValueError("derivative order must be 0, 1 or 2")

    def write(self, path):
        write_coefficients([self.coeffs], path)


def interpolate(f, space):
    """Nodal interpolant: ``coeffs[i] = f(x_i, y_i)``."""
    x, y = space.node_coords.T
    vals = np.broadcast_to(np.asarray(f(x, y), dtype=float), x.shape).copy()
    if not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise EvaluationError(f"non-finite value at node {bad} {tuple(space.node_coords[bad])}")
    return FeFunction(space, vals)


def write_coefficients(blocks, path):
    """One ``dofs N`` header plus N lines per coefficient block."""
    with open(path, "w") as fh:
        for c in blocks:
            fh.write(f"dofs {len(c)}\n")
            fh.writelines(f"{float(v)!r}\n" for v in c)


def read_coefficients(path):
    blocks = []
    with open(path) as fh:
        lines = fh.read().split("\n")
    i = 0
    while i < len(lines) and lines[i].strip():
        tag, n = lines[i].split()
        if tag != "dofs":
            raise ValueError(f"bad block header {lines[i]!r}")
        n = int(n)
        blocks.append(np.array([float(v) for v in lines[i + 1:i + 1 + n]]))
        i += 1 + n
    return blocks
