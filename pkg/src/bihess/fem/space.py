"""Continuous degree-k Lagrange spaces on a triangulation."""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import InvalidArgumentError, PointLocationError
from ..mesh.triangulation import LOCAL_EDGES
from .basis import SUPPORTED_DEGREES, reference_element

VERTEX, EDGE, INTERIOR = 0, 1, 2


@dataclass(frozen=True, eq=False)
class FeSpace:
    mesh: object
    degree: int
    node_coords: np.ndarray
    elem_dofs: np.ndarray
    boundary_dofs: np.ndarray
    node_category: np.ndarray  # VERTEX / EDGE / INTERIOR

    @cached_property
    def _kinds(self):
        return _classify_nodes(self)

    @property
    def node_kind(self):
        """Translation class id of every node (computed on first use)."""
        return self._kinds[0]

    @property
    def kind_labels(self):
        return self._kinds[1]

    @property
    def n_dofs(self):
        return len(self.node_coords)

    @property
    def ref(self):
        return reference_element(self.degree)

    # -- geometry ---------------------------------------------------------
    def jacobians(self):
        """Affine maps x = v0 + J xi: returns J (T,2,2), det J (T,), J^{-1} (T,2,2)."""
        p = self.mesh.vertices[self.mesh.triangles]
        J = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        inv = np.empty_like(J)
        inv[:, 0, 0] = J[:, 1, 1] / det
        inv[:, 1, 1] = J[:, 0, 0] / det
        inv[:, 0, 1] = -J[:, 0, 1] / det
        inv[:, 1, 0] = -J[:, 1, 0] / det
        return J, det, inv

    def map_points(self, ref_pts, elements=None):
        """Physical coordinates (T, Q, 2) of reference points on each element."""
        tris = self.mesh.triangles if elements is None else self.mesh.triangles[elements]
        p = self.mesh.vertices[tris]
        ref_pts = np.atleast_2d(ref_pts)
        lam = np.column_stack([1 - ref_pts.sum(axis=1), ref_pts])
        return np.einsum("qi,tid->tqd", lam, p)

    def physical_basis(self, ref_pts, elements=None):
        """Basis values (Q,nb), physical gradients (T,Q,nb,2) and Hessians (T,Q,nb,2,2)."""
        val, grad, hess = self.ref.tabulate(ref_pts)
        _, _, inv = self.jacobians()
        if elements is not None:
            inv = inv[elements]
        g = np.einsum("qia,tab->tqib", grad, inv)
        h = np.einsum("tab,qiac,tcd->tqibd", inv, hess, inv, optimize=True)
        return val, g, h

    # -- point location ---------------------------------------------------
    def locate(self, points, tol=1e-10):
        """Containing triangle (smallest index on ties) and reference coordinates."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.mesh.n_triangles < 10_000:
            return _locate_brute(self.mesh, points, tol)
        return _locate_buckets(self.mesh, points, tol)


def _barycentric(mesh, tri_ids, points):
    p = mesh.vertices[mesh.triangles[tri_ids]]
    a, b = p[..., 1, :] - p[..., 0, :], p[..., 2, :] - p[..., 0, :]
    det = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    r = points - p[..., 0, :]
    xi = (r[..., 0] * b[..., 1] - r[..., 1] * b[..., 0]) / det
    eta = (a[..., 0] * r[..., 1] - a[..., 1] * r[..., 0]) / det
    return xi, eta


def _locate_brute(mesh, points, tol):
    tri_ids = np.arange(mesh.n_triangles)
    elems = np.empty(len(points), dtype=np.int64)
    ref = np.empty((len(points), 2))
    for i, pt in enumerate(points):
        xi, eta = _barycentric(mesh, tri_ids, pt[None, :])
        inside = (xi >= -tol) & (eta >= -tol) & (1 - xi - eta >= -tol)
        hit = np.flatnonzero(inside)
        if hit.size == 0:
            raise PointLocationError(f"point {tuple(pt)} lies outside the mesh")
        t = hit[0]
        elems[i], ref[i] = t, (xi[t], eta[t])
    return elems, ref


def _locate_buckets(mesh, points, tol):
    p = mesh.vertices[mesh.triangles]
    lo, hi = p.min(axis=1), p.max(axis=1)
    origin = mesh.vertices.min(axis=0)
    size = np.median(hi - lo) + 1e-300
    cells_lo = np.floor((lo - origin) / size).astype(int)
    cells_hi = np.floor((hi - origin) / size).astype(int)
    buckets = {}
    for t in range(mesh.n_triangles):
        for cx in range(cells_lo[t, 0], cells_hi[t, 0] + 1):
            for cy in range(cells_lo[t, 1], cells_hi[t, 1] + 1):
                buckets.setdefault((cx, cy), []).append(t)
    elems = np.empty(len(points), dtype=np.int64)
    ref = np.empty((len(points), 2))
    for i, pt in enumerate(points):
        c = np.floor((pt - origin) / size).astype(int)
        cand = set()
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                cand.update(buckets.get((c[0] + dx, c[1] + dy), ()))
        cand = np.array(sorted(cand), dtype=np.int64)
        if cand.size:
            xi, eta = _barycentric(mesh, cand, pt[None, :])
            inside = np.flatnonzero((xi >= -tol) & (eta >= -tol) & (1 - xi - eta >= -tol))
        else:
            inside = np.array([], dtype=np.int64)
        if inside.size == 0:
            raise PointLocationError(f"point {tuple(pt)} lies outside the mesh")
        j = inside[0]
        elems[i], ref[i] = cand[j], (xi[j], eta[j])
    return elems, ref


def build_space(mesh, k):
    """Degree-k Lagrange space with vertices, then edge nodes, then interior nodes."""
    if k not in SUPPORTED_DEGREES:
        raise InvalidArgumentError(f"degree must be one of {SUPPORTED_DEGREES}, got {k}")
    ref = reference_element(k)
    V, E, T = mesh.n_vertices, mesh.n_edges, mesh.n_triangles
    ne = k - 1
    ni = (k - 1) * (k - 2) // 2
    n_dofs = V + ne * E + ni * T
    tris = mesh.triangles

    elem_dofs = np.empty((T, ref.n_basis), dtype=np.int64)
    elem_dofs[:, :3] = tris
    col = 3
    for le, (a, b) in enumerate(LOCAL_EDGES):
        ga, gb = tris[:, a], tris[:, b]
        forward = ga < gb
        base = V + ne * mesh.tri_edges[:, le]
        for s in range(1, k):
            pos = np.where(forward, s, k - s)
            elem_dofs[:, col] = base + pos - 1
            col += 1
    if ni:
        elem_dofs[:, col:] = V + ne * E + ni * np.arange(T)[:, None] + np.arange(ni)[None, :]

    p = mesh.vertices[tris]
    local_xy = np.einsum("ni,tid->tnd", ref.bary, p)
    coords = np.empty((n_dofs, 2))
    coords[elem_dofs.ravel()] = local_xy.reshape(-1, 2)

    bnd_edges = np.flatnonzero(mesh.boundary_edges)
    bdofs = [mesh.edges[bnd_edges].ravel()]
    for s in range(ne):
        bdofs.append(V + ne * bnd_edges + s)
    boundary_dofs = np.unique(np.concatenate(bdofs))

    category = np.full(n_dofs, INTERIOR, dtype=np.int8)
    category[:V] = VERTEX
    category[V:V + ne * E] = EDGE

    return FeSpace(mesh, k, coords, elem_dofs, boundary_dofs, category)


def _classify_nodes(space):
    """Group nodes into translation classes by the shape of their neighbourhood.

    Two nodes share a class when the elements touching them have the same
    centroid offsets (relative to the node, in units of the
    longest edge).  On periodic patterns these classes are the orbits of the
    mesh translations; near the boundary the truncated neighbourhoods give
    classes of their own.
    """
    mesh = space.mesh
    h = mesh.max_edge_length()
    node_elems = _incidence(space.elem_dofs, space.n_dofs)
    cent = mesh.centroids()
    labels = {}
    kind = np.empty(space.n_dofs, dtype=np.int64)
    for z in range(space.n_dofs):
        off = np.rint((cent[node_elems[z]] - space.node_coords[z]) / h * 1e4).astype(np.int64)
        off = off[np.lexsort((off[:, 1], off[:, 0]))]
        key = (int(space.node_category[z]), off.tobytes())
        kind[z] = labels.setdefault(key, len(labels))
    names = [("vertex", "edge", "interior")[c] + f"-{i}" for i, (c, _) in enumerate(labels)]
    return kind, names


def _incidence(table, n):
    """For every node id, the sorted rows of ``table`` containing it."""
    rows = np.repeat(np.arange(table.shape[0]), table.shape[1])
    keys = table.ravel()
    order = np.lexsort((rows, keys))
    keys, rows = keys[order], rows[order]
    bounds = np.searchsorted(keys, np.arange(n + 1))
    return [np.unique(rows[bounds[i]:bounds[i + 1]]) for i in range(n)]
