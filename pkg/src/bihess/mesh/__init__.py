from .delaunay import circumcircle_violations, delaunay_triangulate, square_point_cloud
from .generate import MeshPattern, generate_lshape, generate_uniform
from .io import read_mesh, write_mesh
from .refine import init_newest_vertex, refine_bisection, refine_regular
from .triangulation import Triangulation, build_edge_topology


def delaunay_square(n, seed=0):
    """Delaunay mesh of the unit square with mesh size about ``1/n``.

    A seeded cloud at spacing 1/8 is triangulated and then refined regularly
    ``log2(n/8)`` times, so ``n`` must be 8 times a power of two.
    """
    levels = 0
    m = 8
    while m < n:
        m *= 2
        levels += 1
    if m != n:
        raise ValueError(f"Delaunay meshes need n = 8 * 2**j, got {n}")
    mesh = delaunay_triangulate(square_point_cloud(seed=seed))
    for _ in range(levels):
        mesh = refine_regular(mesh)
    return mesh


def make_mesh(pattern, n, seed=0):
    pattern = MeshPattern.parse(pattern)
    if pattern is MeshPattern.DELAUNAY:
        return delaunay_square(n, seed=seed)
    return generate_uniform(pattern, n)


__all__ = [
    "MeshPattern",
    "Triangulation",
    "build_edge_topology",
    "circumcircle_violations",
    "delaunay_square",
    "delaunay_triangulate",
    "generate_lshape",
    "generate_uniform",
    "init_newest_vertex",
    "make_mesh",
    "read_mesh",
    "refine_bisection",
    "refine_regular",
    "square_point_cloud",
    "write_mesh",
]
