"""Polynomial preserving gradient recovery and the recovered Hessian.

For each node ``z`` a degree ``k+1`` polynomial is fitted in the least-squares
sense to the nodal values on a patch of elements around ``z`` (the vertex
stars of the entity carrying ``z``, grown by element rings when needed); its gradient at
``z`` is the recovered gradient.  The fit is linear in the data, so the whole
recovery is assembled once per space into two sparse matrices ``Rx`` and
``Ry`` and the Hessian is ``[[Rx Rx, Rx Ry], [Ry Rx, Ry Ry]] u``.
"""
import logging
import weakref
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import DegeneratePatchError
from .fem.basis import monomial_exponents
from .fem.function import FeFunction, write_coefficients
from .fem.space import VERTEX

log = logging.getLogger(__name__)

COND_CAP = 1e8
SAME_TYPE_MAX_RINGS = 4


@dataclass(frozen=True)
class RecoveryPatch:
    node: int
    elements: np.ndarray
    samples: np.ndarray
    local_scale: float
    same_type: bool = False


@dataclass(frozen=True, eq=False)
class HessianField:
    xx: FeFunction
    xy: FeFunction
    yx: FeFunction
    yy: FeFunction

    @property
    def space(self):
        return self.xx.space

    def nodal(self):
        """(N, 2, 2) nodal values."""
        return np.stack(
            [np.stack([self.xx.coeffs, self.xy.coeffs], -1), np.stack([self.yx.coeffs, self.yy.coeffs], -1)],
            -2,
        )

    def at_reference(self, ref_pts, elements=None):
        """(T, Q, 2, 2) values at reference points of each element."""
        comps = [c.at_reference(ref_pts, 0, elements) for c in (self.xx, self.xy, self.yx, self.yy)]
        return np.stack([np.stack(comps[:2], -1), np.stack(comps[2:], -1)], -2)

    def write(self, path):
        write_coefficients([c.coeffs for c in (self.xx, self.xy, self.yx, self.yy)], path)


def fit_dimension(k):
    return (k + 2) * (k + 3) // 2


class _Topology:
    """Node/element incidences used to grow patches."""

    def __init__(self, space):
        self.space = space
        mesh = space.mesh
        ed = space.elem_dofs
        T, nb = ed.shape
        self.node_elems = _csr_lists(ed.ravel(), np.repeat(np.arange(T), nb), space.n_dofs)
        tris = mesh.triangles
        self.vert_elems = _csr_lists(tris.ravel(), np.repeat(np.arange(T), 3), mesh.n_vertices)

    def seed_elements(self, z):
        """Elements touching a vertex of the smallest mesh entity carrying ``z``.

        A vertex gets its element star, an edge node the union of the stars
        of the edge's endpoints, an interior node the stars of its
        triangle's corners.
        """
        elems = self.node_elems[z]
        if self.space.node_category[z] == VERTEX:
            return elems
        tris = self.space.mesh.triangles[elems]
        verts = tris[0] if len(elems) == 1 else np.intersect1d(tris[0], tris[1])
        return np.unique(np.concatenate([self.vert_elems[v] for v in verts]))

    def grow(self, elems):
        verts = np.unique(self.space.mesh.triangles[elems])
        return np.unique(np.concatenate([self.vert_elems[v] for v in verts]))

    def nodes_of(self, elems):
        return np.unique(self.space.elem_dofs[elems])


def _csr_lists(keys, vals, n):
    order = np.lexsort((vals, keys))
    keys, vals = keys[order], vals[order]
    bounds = np.searchsorted(keys, np.arange(n + 1))
    return [np.unique(vals[bounds[i]:bounds[i + 1]]) for i in range(n)]


def _samples(topo, z, elems, same_type):
    nodes = topo.nodes_of(elems)
    if same_type:
        kind = topo.space.node_kind
        nodes = nodes[kind[nodes] == kind[z]]
    return nodes


def _initial_patch(topo, z, same_type, need):
    elems = topo.seed_elements(z)
    samples = _samples(topo, z, elems, same_type)
    rings = 0
    n_el = topo.space.mesh.n_triangles
    while len(samples) < need:
        if len(elems) == n_el or (same_type and rings >= SAME_TYPE_MAX_RINGS):
            return None
        elems = topo.grow(elems)
        rings += 1
        samples = _samples(topo, z, elems, same_type)
    return elems, samples, rings


class RecoveryOperator:
    """Sparse gradient-recovery matrices for one FE space."""

    def __init__(self, space, same_type=False, cond_cap=COND_CAP):
        self.space = space
        self.same_type = same_type
        self.cond_cap = cond_cap
        k = space.degree
        self.exps = np.array(monomial_exponents(k + 1), dtype=np.int64)
        need = len(self.exps)
        topo = _Topology(space)
        N = space.n_dofs
        patches = [None] * N
        typed = np.zeros(N, dtype=bool)
        self.fallbacks = 0
        for z in range(N):
            p = _initial_patch(topo, z, True, need) if same_type else None
            if p is None:
                if same_type:
                    self.fallbacks += 1
                p = _initial_patch(topo, z, False, need)
                if p is None:
                    raise DegeneratePatchError(f"node {z}: whole mesh has fewer than {need} nodes")
            else:
                typed[z] = True
            patches[z] = p

        # enforce the rank condition: grow failing patches one ring at a time
        todo = np.arange(N)
        weights = {}
        while todo.size:
            w, cond, scale = self._weights(patches, todo)
            bad = ~(cond <= cond_cap)
            for i in np.flatnonzero(~bad):
                weights[todo[i]] = (w[i], scale[i])
            still = []
            for z in todo[bad]:
                elems, samples, rings = patches[z]
                if len(elems) == space.mesh.n_triangles:
                    raise DegeneratePatchError(
                        f"node {z}: least-squares fit stays ill-conditioned on the whole mesh"
                    )
                if typed[z] and rings >= SAME_TYPE_MAX_RINGS:
                    typed[z] = False
                    self.fallbacks += 1
                    patches[z] = _initial_patch(topo, z, False, need)
                else:
                    elems = topo.grow(elems)
                    patches[z] = (elems, _samples(topo, z, elems, typed[z]), rings + 1)
                still.append(z)
            todo = np.array(still, dtype=np.int64)

        self.patches = patches
        self.typed = typed
        rows, cols, vx, vy = [], [], [], []
        for z in range(N):
            samples = patches[z][1]
            w, scale = weights[z]
            m = len(samples)
            rows.append(np.full(m, z))
            cols.append(samples)
            vx.append(w[:m, 0] / scale)
            vy.append(w[:m, 1] / scale)
        rows, cols = np.concatenate(rows), np.concatenate(cols)
        self.Rx = sp.csr_matrix((np.concatenate(vx), (rows, cols)), shape=(N, N))
        self.Ry = sp.csr_matrix((np.concatenate(vy), (rows, cols)), shape=(N, N))
        if same_type and self.fallbacks:
            log.info("same-type sampling fell back to all nodes at %d of %d nodes", self.fallbacks, N)

    def _weights(self, patches, nodes):
        X = self.space.node_coords
        counts = np.array([len(patches[z][1]) for z in nodes], dtype=np.int64)
        M = int(counts.max())
        rel = np.zeros((len(nodes), M, 2))
        origin = np.empty((len(nodes), 2))
        scale = np.empty(len(nodes))
        for i, z in enumerate(nodes):
            pts = X[patches[z][1]]
            center = pts.mean(axis=0)
            d = pts - center
            scale[i] = np.sqrt((d**2).sum(axis=1).max())
            rel[i, : len(d)] = d / scale[i]
            origin[i] = (X[z] - center) / scale[i]
        w, cond = kernels.recovery_weights(rel, counts, self.exps, origin)
        return w, cond, scale

    def patch(self, z):
        elems, samples, _ = self.patches[z]
        pts = self.space.node_coords[samples]
        d = pts - pts.mean(axis=0)
        return RecoveryPatch(
            int(z), elems, samples, float(np.sqrt((d**2).sum(axis=1).max())), bool(self.typed[z])
        )

    def gradient(self, u):
        return FeFunction(self.space, self.Rx @ u.coeffs), FeFunction(self.space, self.Ry @ u.coeffs)

    def hessian(self, u):
        gx, gy = self.Rx @ u.coeffs, self.Ry @ u.coeffs
        S = self.space
        return HessianField(
            FeFunction(S, self.Rx @ gx),
            FeFunction(S, self.Rx @ gy),
            FeFunction(S, self.Ry @ gx),
            FeFunction(S, self.Ry @ gy),
        )


_cache = weakref.WeakKeyDictionary()


def recovery_operator(space, same_type=False):
    ops = _cache.setdefault(space, {})
    if same_type not in ops:
        ops[same_type] = RecoveryOperator(space, same_type)
    return ops[same_type]


def build_patch(space, z, same_type=False):
    return recovery_operator(space, same_type).patch(z)


def fit_polynomial(patch, values, space):
    """Least-squares coefficients of the degree k+1 fit in coordinates ``(x - z) / scale``.

    The recovery operator itself fits in coordinates centred at the sample
    centroid (better conditioned near corners); the fitted polynomial is the
    same.

    Coefficients follow :func:`bihess.fem.basis.monomial_exponents` order.
    """
    exps = np.array(monomial_exponents(space.degree + 1))
    rel = (space.node_coords[patch.samples] - space.node_coords[patch.node]) / patch.local_scale
    V = rel[:, 0, None] ** exps[:, 0] * rel[:, 1, None] ** exps[:, 1]
    coef, *_ = np.linalg.lstsq(V, np.asarray(values, dtype=float), rcond=None)
    return coef


def recover_gradient(u, same_type=False):
    return recovery_operator(u.space, same_type).gradient(u)


def recover_hessian(u, same_type=False):
    return recovery_operator(u.space, same_type).hessian(u)
