"""Interior error quantities and convergence studies on the unit square."""
import csv
import logging
import time
from dataclasses import dataclass

import numpy as np

from ..c0ip import default_gamma, solve_biharmonic
from ..fem import build_space, lattice_nodes
from ..fem.quadrature import quadrature_for
from ..mesh import make_mesh
from ..recovery import recover_hessian
from .solutions import square_solution

log = logging.getLogger(__name__)

DEFAULT_L = 0.1


@dataclass(frozen=True)
class InteriorSplit:
    """Nodes near the boundary (``N1``) and the element sets on either side."""

    N1: np.ndarray  # boolean mask over nodes
    omega1: np.ndarray  # element indices
    omega2: np.ndarray
    L: float


def boundary_distance(mesh, points):
    """Exact distance from each point to the polygonal mesh boundary."""
    e = mesh.edges[mesh.boundary_edges]
    a = mesh.vertices[e[:, 0]]
    d = mesh.vertices[e[:, 1]] - a
    p = np.asarray(points, dtype=float)
    best = np.full(len(p), np.inf)
    # loop over boundary segments; their count is O(sqrt(T))
    for ai, di in zip(a, d):
        t = np.clip(((p - ai) @ di) / (di @ di), 0.0, 1.0)
        best = np.minimum(best, np.hypot(*(p - ai - t[:, None] * di).T))
    return best


def interior_split(space, L=DEFAULT_L, by_nodes=False):
    """Split elements into the boundary layer ``Omega1`` and the interior ``Omega2``.

    ``Omega1`` holds elements whose triangle corners all lie within ``L`` of
    the boundary; with ``by_nodes`` every Lagrange node must.
    """
    if L < 0:
        raise ValueError("L must be nonnegative")
    dist = boundary_distance(space.mesh, space.node_coords)
    near = dist <= L + 1e-12
    nodes = space.elem_dofs if by_nodes else space.elem_dofs[:, :3]
    in1 = near[nodes].all(axis=1)
    return InteriorSplit(near, np.flatnonzero(in1), np.flatnonzero(~in1), float(L))


def _lagrange_ref_points(k):
    return lattice_nodes(k)[:, 1:] / k


def error_norms(u_h, H, exact, split, extra_degree=4, pointwise="max"):
    """Return ``(He0, Hre0, HreInf)``.

    He0 is the broken H2 seminorm error of ``u_h`` over all elements.  Hre0
    measures the recovered Hessian ``H`` against the exact one over ``Omega2``
    in L2 (Frobenius).  HreInf is its maximum over ``Omega2``, sampled at
    quadrature points and Lagrange nodes; ``pointwise`` picks the matrix norm
    at a point: ``"max"`` (largest entry) or ``"frobenius"``.  ``H`` may also
    be a callable ``(x, y) -> (..., 2, 2)``.
    """
    if pointwise not in ("max", "frobenius"):
        raise ValueError("pointwise must be 'max' or 'frobenius'")
    space = u_h.space
    k = space.degree
    rule = quadrature_for("element", min(2 * k + extra_degree, 12))
    _, det, _ = space.jacobians()
    xy = space.map_points(rule.ref_points)
    D2u = exact.hess(xy[..., 0], xy[..., 1])
    diff = D2u - u_h.at_reference(rule.ref_points, order=2)
    He0 = np.sqrt(np.sum(np.einsum("tqab,tqab,q->t", diff, diff, rule.weights) * np.abs(det)))

    om = split.omega2
    if om.size == 0:
        return float(He0), 0.0, 0.0
    pts = np.vstack([rule.ref_points, _lagrange_ref_points(k)])
    xy2 = space.map_points(pts, om)
    D2 = exact.hess(xy2[..., 0], xy2[..., 1])
    Hh = H(xy2[..., 0], xy2[..., 1]) if callable(H) else H.at_reference(pts, om)
    r = D2 - Hh
    nq = len(rule.weights)
    sq = np.einsum("tqab,tqab->tq", r, r)
    Hre0 = np.sqrt(np.sum(sq[:, :nq] @ rule.weights * np.abs(det[om])))
    HreInf = np.sqrt(sq.max()) if pointwise == "frobenius" else np.abs(r).max()
    return float(He0), float(Hre0), float(HreInf)


@dataclass(frozen=True)
class ConvergenceRow:
    inv_h: int
    He0: float
    He0_order: float
    Hre0: float
    Hre0_order: float
    HreInf: float
    HreInf_order: float
    dofs: int = 0
    seconds: float = 0.0


CSV_FIELDS = ("inv_h", "He0", "He0_order", "Hre0", "Hre0_order", "HreInf", "HreInf_order")


def _order(prev, cur):
    if prev is None or prev <= 0 or cur <= 0:
        return float("nan")
    return float(np.log2(prev / cur))


def solve_square(pattern, k, n, gamma=None, seed=0, solver="direct", same_type=False):
    """Solve the clamped square benchmark; return ``(u_h, H, system)``."""
    exact = square_solution()
    space = build_space(make_mesh(pattern, n, seed=seed), k)
    u_h, system = solve_biharmonic(space, exact.f, exact.g_D, exact.g_N, gamma, method=solver)
    return u_h, recover_hessian(u_h, same_type), system


def convergence_study(pattern, k, n_list, gamma=None, L=DEFAULT_L, seed=0, solver="direct",
                      same_type=False, by_nodes=False, on_solve=None, pointwise="max"):
    """Run the square benchmark on successively halved meshes.

    ``on_solve(n, u_h, system)`` is called after each solve (used for dumps).
    """
    n_list = [int(n) for n in n_list]
    if any(b != 2 * a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must double at every step")
    gamma = default_gamma(k) if gamma is None else gamma
    exact = square_solution()
    rows = []
    prev = None
    for n in n_list:
        t0 = time.perf_counter()
        try:
            u_h, H, system = solve_square(pattern, k, n, gamma, seed, solver, same_type)
            split = interior_split(u_h.space, L, by_nodes)
            e = error_norms(u_h, H, exact, split, pointwise=pointwise)
        except Exception as exc:
            raise type(exc)(f"{pattern} k={k} n={n}: {exc}") from exc
        if on_solve is not None:
            on_solve(n, u_h, system)
        orders = [_order(None if prev is None else p, c) for p, c in zip(prev or (None,) * 3, e)]
        row = ConvergenceRow(n, e[0], orders[0], e[1], orders[1], e[2], orders[2],
                             u_h.space.n_dofs, time.perf_counter() - t0)
        log.info("n=%d dofs=%d He0=%.3e Hre0=%.3e HreInf=%.3e (%.1fs)",
                 n, row.dofs, *e, row.seconds)
        rows.append(row)
        prev = e
    return rows


def write_convergence_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for r in rows:
            w.writerow([r.inv_h] + [f"{getattr(r, f):.6e}" for f in CSV_FIELDS[1:]])
