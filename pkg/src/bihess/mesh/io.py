"""Plain-text mesh format: ``vertices V triangles T`` then V coordinate lines and T index lines."""
import numpy as np

from .triangulation import Triangulation


def write_mesh(mesh, path):
    with open(path, "w") as fh:
        fh.write(f"vertices {mesh.n_vertices} triangles {mesh.n_triangles}\n")
        for x, y in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")


def read_mesh(path, pattern_tag=None):
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "vertices" or header[2] != "triangles":
            raise ValueError(f"bad mesh header: {' '.join(header)!r}")
        nv, nt = int(header[1]), int(header[3])
        verts = np.loadtxt(fh, max_rows=nv, ndmin=2)
        tris = np.loadtxt(fh, max_rows=nt, dtype=np.int64, ndmin=2)
    return Triangulation.from_arrays(verts, tris, pattern_tag=pattern_tag)
