"""The L-shaped adaptive experiment."""
import logging
import os

import numpy as np

from ..adapt import AdaptiveProblem, adaptive_loop, write_adapt_csv
from ..mesh import generate_lshape, write_mesh
from .solutions import lshape_solution

log = logging.getLogger(__name__)

INITIAL_N = 2


def adaptive_study(theta=0.5, max_dofs=50_000, out=None, mesh_dir=None, dump_mesh_every=None,
                   degree=2, gamma=None, n0=INITIAL_N, squared=True, same_type=False,
                   solver="direct"):
    """Adaptive C0IP on the L-shape with data from ``u = r^(5/3) sin(5 theta / 3)``.

    Records go to ``out`` as CSV.  Meshes of the first and last iterations
    (and of every ``dump_mesh_every``-th one) are written to ``mesh_dir``.
    Returns ``(records, origin_hits)`` where ``origin_hits[i]`` tells whether
    an element touching the re-entrant corner was marked in iteration ``i``.
    """
    problem = AdaptiveProblem(generate_lshape(n0), degree, lshape_solution(), gamma=gamma)
    hits = []
    meshes = {}

    def on_iter(rec, mesh, u_h, est, marked):
        if marked.size:
            corner = np.flatnonzero((np.abs(mesh.vertices[mesh.triangles]).sum(axis=2) == 0).any(axis=1))
            hits.append(bool(np.isin(corner, marked).any()))
        if mesh_dir is not None:
            every = dump_mesh_every and rec.iter % dump_mesh_every == 0
            if rec.iter == 0 or every:
                _dump(mesh_dir, rec.iter, mesh)
            meshes["last"] = (rec.iter, mesh)

    records = adaptive_loop(problem, max_dofs, theta, squared, same_type, solver, callback=on_iter)
    if mesh_dir is not None and "last" in meshes:
        _dump(mesh_dir, *meshes["last"])
    if out is not None:
        write_adapt_csv(records, out)
    return records, hits


def _dump(mesh_dir, it, mesh):
    os.makedirs(mesh_dir, exist_ok=True)
    write_mesh(mesh, os.path.join(mesh_dir, f"mesh_{it:03d}.txt"))
