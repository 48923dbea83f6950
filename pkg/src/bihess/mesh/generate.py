"""Structured meshes of the unit square and the L-shaped domain."""
from enum import Enum

import numpy as np

from ..errors import InvalidArgumentError
from .triangulation import Triangulation


class MeshPattern(str, Enum):
    REGULAR = "regular"
    CHEVRON = "chevron"
    CRISSCROSS = "crisscross"
    UNIONJACK = "unionjack"
    EQUILATERAL = "equilateral"
    DELAUNAY = "delaunay"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower().replace("-", "").replace("_", ""))
        except ValueError:
            raise InvalidArgumentError(f"unknown mesh pattern {value!r}") from None


def _check_n(n):
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n!r}")
    return int(n)


def _grid(n, x0=0.0, y0=0.0, width=1.0):
    t = np.arange(n + 1) / n
    X, Y = np.meshgrid(x0 + width * t, y0 + width * t)
    return np.column_stack([X.ravel(), Y.ravel()])


def _cell_corners(n):
    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i, j = i.ravel(), j.ravel()
    a = j * (n + 1) + i
    return i, j, a, a + 1, a + n + 2, a + n + 1


def _two_triangle_cells(n, flip):
    """Split each cell along a-c, or along b-d where ``flip`` is set."""
    _, _, a, b, c, d = _cell_corners(n)
    t1 = np.where(flip[:, None], np.column_stack([a, b, d]), np.column_stack([a, b, c]))
    t2 = np.where(flip[:, None], np.column_stack([b, c, d]), np.column_stack([a, c, d]))
    return np.stack([t1, t2], axis=1).reshape(-1, 3)


def generate_uniform(pattern, n):
    """Uniform ``n x n`` mesh of the unit square in one of the periodic patterns."""
    pattern = MeshPattern.parse(pattern)
    n = _check_n(n)
    if pattern is MeshPattern.DELAUNAY:
        raise InvalidArgumentError("use delaunay_triangulate / delaunay_square for Delaunay meshes")
    if pattern is MeshPattern.EQUILATERAL:
        return _equilateral(n)

    verts = _grid(n)
    i, j, a, b, c, d = _cell_corners(n)
    if pattern is MeshPattern.REGULAR:
        tris = _two_triangle_cells(n, np.zeros(n * n, dtype=bool))
    elif pattern is MeshPattern.CHEVRON:
        tris = _two_triangle_cells(n, i % 2 == 1)
    elif pattern is MeshPattern.UNIONJACK:
        tris = _two_triangle_cells(n, (i + j) % 2 == 1)
    else:  # criss-cross
        m = len(verts) + np.arange(n * n)
        centers = (verts[a] + verts[c]) / 2
        verts = np.vstack([verts, centers])
        tris = np.stack(
            [np.column_stack(q) for q in ((a, b, m), (b, c, m), (c, d, m), (d, a, m))], axis=1
        ).reshape(-1, 3)
    return Triangulation.from_arrays(verts, tris, pattern_tag=pattern.value)


def _equilateral(n):
    # rows of isosceles triangles; odd rows are shifted by half a cell and
    # padded with the boundary points x = 0 and x = 1
    rows = []
    verts = []
    for j in range(n + 1):
        if j % 2 == 0:
            xs = np.arange(n + 1) / n
        else:
            xs = np.concatenate([[0.0], (np.arange(n) + 0.5) / n, [1.0]])
        start = len(verts)
        verts.extend((x, j / n) for x in xs)
        rows.append((start, xs))
    tris = []
    for j in range(n):
        (s0, x0), (s1, x1) = rows[j], rows[j + 1]
        p, q = 0, 0
        while p < len(x0) - 1 or q < len(x1) - 1:
            advance_bottom = q == len(x1) - 1 or (p < len(x0) - 1 and x0[p + 1] <= x1[q + 1])
            if advance_bottom:
                tris.append((s0 + p, s0 + p + 1, s1 + q))
                p += 1
            else:
                tris.append((s0 + p, s1 + q + 1, s1 + q))
                q += 1
    return Triangulation.from_arrays(np.array(verts), np.array(tris), pattern_tag="equilateral")


def generate_lshape(n):
    """Regular-pattern mesh of (-1,1)^2 minus (0,1)x(-1,0) with cell size 1/n."""
    n = _check_n(n)
    m = 2 * n
    verts = _grid(m, -1.0, -1.0, 2.0)
    i, j, a, b, c, d = _cell_corners(m)
    keep = ~((i >= n) & (j < n))
    tris = np.stack([np.column_stack([a, b, c]), np.column_stack([a, c, d])], axis=1)[keep]
    tris = tris.reshape(-1, 3)
    used = np.unique(tris)
    remap = np.full(len(verts), -1)
    remap[used] = np.arange(len(used))
    return Triangulation.from_arrays(verts[used], remap[tris], pattern_tag="lshape")
