"""C0 interior penalty discretisation of the clamped biharmonic problem.

Edge conventions: on an interior edge the normal ``n`` points from ``T-``
(smaller triangle index) into ``T+``; ``{w} = (w+ + w-)/2`` and
``[w] = w+ - w-``.  On a boundary edge ``n`` is the outward normal,
``{d2v/dn2} = d2v/dn2`` and ``[dv/dn] = -dv/dn``, which makes the form
consistent with the clamped problem.
"""
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import EvaluationError, InvalidArgumentError
from .fem.function import FeFunction
from .fem.quadrature import quadrature_for
from .linalg import DEFAULT_TOL, SparseSymMatrix, spd_solve
from .mesh.triangulation import LOCAL_EDGES


GAMMA_FACTOR = 3.25


def default_gamma(k):
    """Penalty ``3.25 k (k - 1)``.

    The edge terms pair second derivatives (degree ``k - 2`` on an edge) with
    jumps, so the trace-inverse constant the penalty must dominate grows like
    ``k (k - 1)``.  The factor keeps the constrained matrix positive definite
    on every supported mesh pattern with some room to spare.
    """
    return GAMMA_FACTOR * k * (k - 1)


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    space: object
    matrix: SparseSymMatrix
    rhs: np.ndarray
    gamma: float
    constrained_dofs: np.ndarray = None
    constrained_values: np.ndarray = None

    @property
    def free_dofs(self):
        mask = np.ones(self.space.n_dofs, dtype=bool)
        if self.constrained_dofs is not None:
            mask[self.constrained_dofs] = False
        return np.flatnonzero(mask)

    def reduced(self):
        """Matrix and right-hand side restricted to the free DOFs."""
        free = self.free_dofs
        return self.matrix.submatrix(free, free), self.rhs[free]


# --- edge traces ------------------------------------------------------------

def _side_tables(space, s, tris, edge_ids):
    """Physical basis gradients/Hessians of triangles ``tris`` at edge points.

    ``s`` are abscissae along each edge measured from its lower vertex.
    Returns grads (S,Q,nb,2), hessians (S,Q,nb,2,2).
    """
    mesh = space.mesh
    ref = space.ref
    tri_edges = mesh.tri_edges[tris]
    le = np.argmax(tri_edges == edge_ids[:, None], axis=1)
    a = LOCAL_EDGES[le, 0]
    lo = mesh.edges[edge_ids, 0]
    rev = mesh.triangles[tris, a] != lo
    case = 2 * le + rev
    Q = len(s)
    g_tab = np.empty((6, Q, ref.n_basis, 2))
    h_tab = np.empty((6, Q, ref.n_basis, 2, 2))
    for c in range(6):
        i, j = LOCAL_EDGES[c // 2]
        t = 1 - s if c % 2 else s
        bary = np.zeros((Q, 3))
        bary[:, i] = 1 - t
        bary[:, j] = t
        _, g_tab[c], h_tab[c] = ref.tabulate(bary[:, 1:])
    _, _, inv = space.jacobians()
    inv = inv[tris]
    g = np.einsum("sqia,sab->sqib", g_tab[case], inv, optimize=True)
    h = np.einsum("sab,sqiac,scd->sqibd", inv, h_tab[case], inv, optimize=True)
    return g, h


def _edge_points(mesh, edge_ids, s):
    p0 = mesh.vertices[mesh.edges[edge_ids, 0]]
    p1 = mesh.vertices[mesh.edges[edge_ids, 1]]
    return p0[:, None, :] + s[None, :, None] * (p1 - p0)[:, None, :]


def _normal_traces(g, h, n):
    dn = np.einsum("sqib,sb->sqi", g, n)
    dnn = np.einsum("sqibd,sb,sd->sqi", h, n, n)
    return dn, dnn


# --- bilinear form ----------------------------------------------------------

def assemble_bilinear(space, gamma, flip=None):
    """Matrix ``A[i, j] = B_h(phi_j, phi_i)`` with exact quadrature.

    ``flip`` optionally swaps the roles of ``T-``/``T+`` on selected edges
    (boolean mask over edges); the result must not change.
    """
    if not gamma > 0:
        raise InvalidArgumentError(f"penalty parameter must be positive, got {gamma}")
    rows, cols, vals = [], [], []
    for dofs, local in _local_matrices(space, gamma, flip):
        m = dofs.shape[1]
        rows.append(np.repeat(dofs, m, axis=1).ravel())
        cols.append(np.tile(dofs, (1, m)).ravel())
        vals.append(local.ravel())
    return SparseSymMatrix.from_coo(
        np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), space.n_dofs
    )


def _local_matrices(space, gamma, flip=None):
    k = space.degree
    mesh = space.mesh
    rule = quadrature_for("element", 2 * k)
    _, _, hess = space.physical_basis(rule.ref_points)
    _, det, _ = space.jacobians()
    wdet = np.abs(det)[:, None] * rule.weights[None, :]
    yield space.elem_dofs, kernels.hessian_stiffness(np.ascontiguousarray(hess), wdet)

    erule = quadrature_for("edge", 2 * k)
    s = erule.points
    lengths = mesh.edge_lengths()
    normals = mesh.edge_normals()
    bnd = mesh.boundary_edges

    inner = np.flatnonzero(~bnd)
    if inner.size:
        tm, tp = mesh.edge_tris[inner, 0], mesh.edge_tris[inner, 1]
        n = normals[inner]
        if flip is not None:
            f = np.asarray(flip)[inner]
            tm, tp = np.where(f, tp, tm), np.where(f, tm, tp)
            n = np.where(f[:, None], -n, n)
        gm, hm = _side_tables(space, s, tm, inner)
        gp, hp = _side_tables(space, s, tp, inner)
        dn_m, dnn_m = _normal_traces(gm, hm, n)
        dn_p, dnn_p = _normal_traces(gp, hp, n)
        jump = np.concatenate([-dn_m, dn_p], axis=2)
        avg = 0.5 * np.concatenate([dnn_m, dnn_p], axis=2)
        L = lengths[inner]
        w = L[:, None] * erule.weights[None, :]
        local = kernels.edge_matrices(jump, avg, w, gamma / L)
        dofs = np.concatenate([space.elem_dofs[tm], space.elem_dofs[tp]], axis=1)
        yield dofs, local

    outer = np.flatnonzero(bnd)
    if outer.size:
        t = mesh.edge_tris[outer, 0]
        g, h = _side_tables(space, s, t, outer)
        dn, dnn = _normal_traces(g, h, normals[outer])
        L = lengths[outer]
        w = L[:, None] * erule.weights[None, :]
        local = kernels.edge_matrices(np.ascontiguousarray(-dn), np.ascontiguousarray(dnn), w, gamma / L)
        yield space.elem_dofs[t], local


# --- right-hand side --------------------------------------------------------

def _checked(values, what):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise EvaluationError(f"{what} returned non-finite values")
    return values


def assemble_load(f, space, degree=None):
    """``b[i] = (f, phi_i)`` by element quadrature of degree ``max(2k+2, degree)``."""
    k = space.degree
    rule = quadrature_for("element", max(2 * k + 2, degree or 0))
    xy = space.map_points(rule.ref_points)
    fv = _checked(np.broadcast_to(f(xy[..., 0], xy[..., 1]), xy.shape[:2]), "load function")
    val, _, _ = space.ref.tabulate(rule.ref_points)
    _, det, _ = space.jacobians()
    local = np.einsum("tq,q,qi->ti", fv * np.abs(det)[:, None], rule.weights, val)
    return np.bincount(space.elem_dofs.ravel(), weights=local.ravel(), minlength=space.n_dofs)


def assemble_system(space, f, gamma=None):
    gamma = default_gamma(space.degree) if gamma is None else float(gamma)
    A = assemble_bilinear(space, gamma)
    b = assemble_load(f, space)
    return AssembledSystem(space, A, b, gamma)


def neumann_data_rhs(space, gamma, g_N):
    """Right-hand-side contribution of prescribed normal derivatives on the boundary.

    ``g_N(x, y, nx, ny)`` returns du/dn for the outward normal.
    """
    mesh = space.mesh
    k = space.degree
    erule = quadrature_for("edge", 2 * k + 2)
    s = erule.points
    outer = np.flatnonzero(mesh.boundary_edges)
    t = mesh.edge_tris[outer, 0]
    n = mesh.edge_normals()[outer]
    L = mesh.edge_lengths()[outer]
    xy = _edge_points(mesh, outer, s)
    gn = _checked(
        np.broadcast_to(g_N(xy[..., 0], xy[..., 1], n[:, None, 0], n[:, None, 1]), xy.shape[:2]),
        "normal-derivative data",
    )
    g, h = _side_tables(space, s, t, outer)
    dn, dnn = _normal_traces(g, h, n)
    data_jump = -gn  # [du/dn] of the data on the boundary
    w = L[:, None] * erule.weights[None, :]
    local = np.einsum("eq,eq,eqi->ei", w, data_jump, dnn + (gamma / L)[:, None, None] * (-dn))
    return np.bincount(space.elem_dofs[t].ravel(), weights=local.ravel(), minlength=space.n_dofs)


def apply_clamped_bc(system, g_D=None, g_N=None):
    """Impose ``u = g_D`` strongly and ``du/dn = g_N`` through the edge terms.

    Boundary rows and columns become identity rows carrying the Dirichlet
    values; their couplings move to the right-hand side.
    """
    space = system.space
    bd = space.boundary_dofs
    rhs = system.rhs.copy()
    if g_N is not None:
        rhs += neumann_data_rhs(space, system.gamma, g_N)
    if g_D is None:
        vals = np.zeros(len(bd))
    else:
        x, y = space.node_coords[bd].T
        vals = _checked(np.broadcast_to(g_D(x, y), x.shape), "Dirichlet data")
    A = system.matrix.to_scipy()
    lift = np.zeros(space.n_dofs)
    lift[bd] = vals
    rhs -= A @ lift
    rhs[bd] = vals
    keep = np.ones(space.n_dofs)
    keep[bd] = 0.0
    D = sp.diags(keep)
    A = D @ A @ D + sp.diags(1.0 - keep)
    return replace(
        system,
        matrix=SparseSymMatrix.from_scipy(A),
        rhs=rhs,
        constrained_dofs=bd,
        constrained_values=vals,
    )


def solve(system, tol=DEFAULT_TOL, method="direct"):
    """Solve the constrained system on its free DOFs and return the FE function."""
    x = np.zeros(system.space.n_dofs)
    if system.constrained_dofs is not None:
        x[system.constrained_dofs] = system.constrained_values
    free = system.free_dofs
    A, b = system.reduced()
    x[free] = spd_solve(A, b, tol=tol, method=method)
    return FeFunction(system.space, x)


def solve_biharmonic(space, f, g_D=None, g_N=None, gamma=None, tol=DEFAULT_TOL, method="direct"):
    system = apply_clamped_bc(assemble_system(space, f, gamma), g_D, g_N)
    return solve(system, tol, method), system


# --- mesh-dependent norms ---------------------------------------------------

def _norm_contributions(v=None, exact=None, space=None, quad_extra=4):
    """Per-element ``|D2 w|^2`` and per-edge jump/average terms of ``w = v - exact``.

    ``exact`` must provide ``grad(x, y) -> (..., 2)`` and ``hess(x, y) -> (..., 2, 2)``.
    """
    space = v.space if v is not None else space
    mesh = space.mesh
    k = space.degree
    deg = 2 * k if exact is None else min(2 * k + quad_extra, 12)
    rule = quadrature_for("element", deg)
    _, det, _ = space.jacobians()
    H = np.zeros((mesh.n_triangles, len(rule.weights), 2, 2))
    if v is not None:
        H += v.at_reference(rule.ref_points, order=2)
    if exact is not None:
        xy = space.map_points(rule.ref_points)
        H -= exact.hess(xy[..., 0], xy[..., 1])
    elem = np.einsum("tqab,tqab,q->t", H, H, rule.weights) * np.abs(det)

    erule = quadrature_for("edge", deg)
    s = erule.points
    L = mesh.edge_lengths()
    normals = mesh.edge_normals()
    edge = np.zeros(mesh.n_edges)
    xy = _edge_points(mesh, np.arange(mesh.n_edges), s)
    if exact is not None:
        gu = exact.grad(xy[..., 0], xy[..., 1])
        hu = exact.hess(xy[..., 0], xy[..., 1])
        dn_u = np.einsum("eqb,eb->eq", gu, normals)
        dnn_u = np.einsum("eqbd,eb,ed->eq", hu, normals, normals)
    for bnd in (False, True):
        ids = np.flatnonzero(mesh.boundary_edges == bnd)
        if ids.size == 0:
            continue
        n = normals[ids]
        sides = [mesh.edge_tris[ids, 0]] if bnd else [mesh.edge_tris[ids, 0], mesh.edge_tris[ids, 1]]
        dn, dnn = [], []
        for t in sides:
            if v is not None:
                g, h = _side_tables(space, s, t, ids)
                c = v.coeffs[space.elem_dofs[t]]
                a = np.einsum("ei,eqib,eb->eq", c, g, n)
                b = np.einsum("ei,eqibd,eb,ed->eq", c, h, n, n)
            else:
                a = b = np.zeros((len(ids), len(s)))
            if exact is not None:
                a = a - dn_u[ids]
                b = b - dnn_u[ids]
            dn.append(a)
            dnn.append(b)
        if bnd:
            avg, jump = dnn[0], -dn[0]
        else:
            avg, jump = 0.5 * (dnn[0] + dnn[1]), dn[1] - dn[0]
        w = erule.weights[None, :] * L[ids, None]
        edge[ids] = (L[ids] * np.sum(w * avg**2, axis=1) + np.sum(w * jump**2, axis=1) / L[ids])
    return elem, edge


def energy_norm(v=None, exact=None, space=None):
    """Mesh-dependent norm of ``v - exact`` (either may be omitted)."""
    elem, edge = _norm_contributions(v, exact, space)
    return float(np.sqrt(elem.sum() + edge.sum()))


def region_edge_weights(mesh, elements):
    """Share of each edge belonging to the element set (1, 1/2 or 0)."""
    inside = np.zeros(mesh.n_triangles, dtype=bool)
    inside[np.asarray(elements, dtype=np.int64)] = True
    tm, tp = mesh.edge_tris[:, 0], mesh.edge_tris[:, 1]
    w_in = inside[tm].astype(float)
    bnd = tp < 0
    w_in[~bnd] = 0.5 * (inside[tm[~bnd]].astype(float) + inside[tp[~bnd]].astype(float))
    return inside, w_in


def seminorms_on_subdomain(v, elements, exact=None):
    """Mesh-dependent norm restricted to an element set.

    Interior edges on the rim of the set count with weight 1/2, so the
    squared norms of a set and its complement add up to the full norm.
    """
    space = v.space
    elem, edge = _norm_contributions(v, exact)
    inside, w_edge = region_edge_weights(space.mesh, elements)
    return float(np.sqrt(elem[inside].sum() + (w_edge * edge).sum()))
