"""Conforming triangulations and their edge topology."""
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateGeometryError, TopologyError

# local edge i is opposite local vertex i
LOCAL_EDGES = np.array([[1, 2], [2, 0], [0, 1]])


@dataclass(frozen=True, eq=False)
class Triangulation:
    """Immutable triangle mesh.

    Attributes
    ----------
    vertices : (V, 2) float array
    triangles : (T, 3) int array, counter-clockwise
    edges : (E, 2) int array, each row sorted ascending
    edge_tris : (E, 2) int array
        ``[T-, T+]`` with ``T- < T+``; ``T+ == -1`` on boundary edges.
        The edge normal always points out of ``T-``.
    tri_edges : (T, 3) int array
        Global edge index of the local edge opposite each local vertex.
    boundary_edges : (E,) bool array
    pattern_tag : str or None
    nvb_ready : bool
        True when local vertex 0 of every triangle is its newest vertex,
        i.e. the refinement edge is local edge 0.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray = field(repr=False)
    edge_tris: np.ndarray = field(repr=False)
    tri_edges: np.ndarray = field(repr=False)
    boundary_edges: np.ndarray = field(repr=False)
    pattern_tag: str | None = None
    nvb_ready: bool = False

    @classmethod
    def from_arrays(cls, vertices, triangles, pattern_tag=None, nvb_ready=False, orient=True):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise ValueError("vertices must have shape (V, 2)")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise ValueError("triangles must have shape (T, 3)")
        if not np.all(np.isfinite(vertices)):
            raise ValueError("vertex coordinates must be finite")
        if len(triangles) and (triangles.min() < 0 or triangles.max() >= len(vertices)):
            raise ValueError("triangle references a missing vertex")
        area2 = signed_area2(vertices, triangles)
        if orient:
            flip = area2 < 0
            if np.any(flip):
                triangles = triangles.copy()
                triangles[flip] = triangles[flip][:, [0, 2, 1]]
                area2 = np.abs(area2)
        scale = np.ptp(vertices, axis=0).max() if len(vertices) else 1.0
        if np.any(area2 <= 1e-14 * scale**2):
            bad = int(np.argmin(area2))
            raise DegenerateGeometryError(f"triangle {bad} has non-positive area")
        return build_edge_topology(vertices, triangles, pattern_tag, nvb_ready)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    def areas(self):
        return 0.5 * signed_area2(self.vertices, self.triangles)

    def area(self):
        return float(self.areas().sum())

    def edge_lengths(self):
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    def boundary_vertices(self):
        return np.unique(self.edges[self.boundary_edges])

    def centroids(self):
        return self.vertices[self.triangles].mean(axis=1)

    def edge_normals(self):
        """Unit normals pointing out of ``T-`` (outward on the boundary)."""
        p0 = self.vertices[self.edges[:, 0]]
        d = self.vertices[self.edges[:, 1]] - p0
        n = np.stack([d[:, 1], -d[:, 0]], axis=1)
        n /= np.hypot(n[:, 0], n[:, 1])[:, None]
        # flip where the normal points into T-
        c = self.centroids()[self.edge_tris[:, 0]]
        s = np.einsum("ij,ij->i", c - p0, n)
        n[s > 0] *= -1
        return n

    def max_edge_length(self):
        return float(self.edge_lengths().max())

    def with_tag(self, tag):
        return Triangulation(self.vertices, self.triangles, self.edges, self.edge_tris,
                             self.tri_edges, self.boundary_edges, tag, self.nvb_ready)


def signed_area2(vertices, triangles):
    p = vertices[triangles]
    a = p[:, 1] - p[:, 0]
    b = p[:, 2] - p[:, 0]
    return a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]


def build_edge_topology(vertices, triangles, pattern_tag=None, nvb_ready=False):
    """Populate edges, adjacency and boundary flags.

    Raises :class:`TopologyError` if an edge is shared by three or more
    triangles.
    """
    n_tri = len(triangles)
    local = triangles[:, LOCAL_EDGES].reshape(-1, 2)
    local = np.sort(local, axis=1)
    edges, inverse, counts = np.unique(local, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    if np.any(counts > 2):
        bad = edges[np.argmax(counts)]
        raise TopologyError(f"edge {tuple(bad)} is shared by more than two triangles")
    tri_of = np.repeat(np.arange(n_tri), 3)
    order = np.lexsort((tri_of, inverse))
    inv_sorted = inverse[order]
    tri_sorted = tri_of[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = inv_sorted[1:] != inv_sorted[:-1]
    edge_tris = np.full((len(edges), 2), -1, dtype=np.int64)
    edge_tris[inv_sorted[first], 0] = tri_sorted[first]
    edge_tris[inv_sorted[~first], 1] = tri_sorted[~first]
    return Triangulation(
        vertices=vertices,
        triangles=triangles,
        edges=edges.astype(np.int64),
        edge_tris=edge_tris,
        tri_edges=inverse.reshape(n_tri, 3).astype(np.int64),
        boundary_edges=edge_tris[:, 1] < 0,
        pattern_tag=pattern_tag,
        nvb_ready=nvb_ready,
    )
