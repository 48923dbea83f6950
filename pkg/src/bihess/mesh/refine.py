"""Uniform (red) refinement and newest-vertex bisection."""
import numpy as np

from .triangulation import Triangulation, build_edge_topology


def refine_regular(mesh):
    """Split every triangle into four similar children through edge midpoints."""
    V = mesh.n_vertices
    mids = 0.5 * (mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]])
    verts = np.vstack([mesh.vertices, mids])
    a, b, c = mesh.triangles.T
    ma, mb, mc = (V + mesh.tri_edges).T  # midpoints opposite a, b, c
    tris = np.stack(
        [
            np.column_stack([a, mc, mb]),
            np.column_stack([mc, b, ma]),
            np.column_stack([mb, ma, c]),
            np.column_stack([ma, mb, mc]),
        ],
        axis=1,
    ).reshape(-1, 3)
    return Triangulation.from_arrays(verts, tris, pattern_tag=mesh.pattern_tag, orient=False)


def init_newest_vertex(mesh):
    """Rotate each triangle so its longest edge is opposite local vertex 0."""
    if mesh.nvb_ready:
        return mesh
    p = mesh.vertices[mesh.triangles]
    # length of the edge opposite each local vertex
    lengths = np.stack(
        [np.linalg.norm(p[:, (i + 2) % 3] - p[:, (i + 1) % 3], axis=1) for i in range(3)], axis=1
    )
    # first maximal edge wins ties; tolerate round-off in the comparison
    longest = np.argmax(lengths >= lengths.max(axis=1, keepdims=True) * (1 - 1e-12), axis=1)
    idx = (longest[:, None] + np.arange(3)[None, :]) % 3
    tris = np.take_along_axis(mesh.triangles, idx, axis=1)
    return build_edge_topology(mesh.vertices, tris, mesh.pattern_tag, nvb_ready=True)


def refine_bisection(mesh, marked):
    """Newest-vertex bisection of the marked triangles plus conforming closure.

    Every triangle stores its newest vertex in local slot 0, so its refinement
    edge is local edge 0.  On the first call the longest edge of each triangle
    is chosen as refinement edge.
    """
    marked = np.asarray(sorted(set(int(t) for t in marked)), dtype=np.int64)
    if marked.size == 0:
        return mesh
    if marked.min() < 0 or marked.max() >= mesh.n_triangles:
        raise IndexError("marked triangle index out of range")
    mesh = init_newest_vertex(mesh)

    ref_edge = mesh.tri_edges[:, 0]
    split = np.zeros(mesh.n_edges, dtype=bool)
    split[ref_edge[marked]] = True
    while True:
        need = split[mesh.tri_edges].any(axis=1) & ~split[ref_edge]
        if not need.any():
            break
        split[ref_edge[need]] = True

    V = mesh.n_vertices
    split_ids = np.flatnonzero(split)
    e = mesh.edges[split_ids]
    new_verts = 0.5 * (mesh.vertices[e[:, 0]] + mesh.vertices[e[:, 1]])
    midpoint = {(int(a), int(b)): V + k for k, (a, b) in enumerate(e)}

    out = []
    stack = []
    for tri in mesh.triangles.tolist():
        stack.append(tri)
        while stack:
            a, b, c = stack.pop()
            m = midpoint.get((b, c) if b < c else (c, b))
            if m is None:
                out.append((a, b, c))
            else:
                # children keep the new vertex in slot 0; push second child first
                # so the first child is emitted first
                stack.append((m, c, a))
                stack.append((m, a, b))
    verts = np.vstack([mesh.vertices, new_verts])
    return build_edge_topology(verts, np.array(out, dtype=np.int64), mesh.pattern_tag, nvb_ready=True)
