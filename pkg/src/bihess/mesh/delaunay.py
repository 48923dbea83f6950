"""Incremental Bowyer-Watson Delaunay triangulation.

The convex hull is closed off by "ghost" triangles sharing a vertex at
infinity instead of a finite super-triangle.  A ghost triangle ``(a, b, G)``
owns the open half-plane to the left of ``a -> b`` plus the open segment
``ab``, which keeps collinear boundary points from producing slivers.
"""
from collections import deque

import numpy as np

from ..errors import DegenerateGeometryError
from .triangulation import Triangulation

GHOST = -1
DUPLICATE_TOL = 1e-12


def _orient(p, q, r):
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _incircle(a, b, c, d):
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    return (
        adx * (bdy * cd - bd * cdy)
        - ady * (bdx * cd - bd * cdx)
        + ad * (bdx * cdy - bdy * cdx)
    )


def merge_duplicates(points, tol=DUPLICATE_TOL):
    """Drop points closer than ``tol`` (max-norm) to an earlier point."""
    pts = np.asarray(points, dtype=float)
    keep = []
    seen = {}
    for i, p in enumerate(pts):
        key = (int(np.floor(p[0] / tol / 4)), int(np.floor(p[1] / tol / 4)))
        dup = False
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for j in seen.get((key[0] + dx, key[1] + dy), ()):
                    if np.max(np.abs(pts[j] - p)) <= tol:
                        dup = True
        if not dup:
            seen.setdefault(key, []).append(i)
            keep.append(i)
    return pts[keep]


class _BowyerWatson:
    def __init__(self, pts):
        self.pts = pts
        self.tris = {}  # id -> (a, b, c), CCW, GHOST allowed in slot 2
        self.edge_owner = {}  # directed edge -> tri id
        self.next_id = 0
        self.scale = float(np.ptp(pts, axis=0).max())

    def add(self, tri):
        tid = self.next_id
        self.next_id += 1
        self.tris[tid] = tri
        a, b, c = tri
        for e in ((a, b), (b, c), (c, a)):
            self.edge_owner[e] = tid
        return tid

    def remove(self, tid):
        a, b, c = self.tris.pop(tid)
        for e in ((a, b), (b, c), (c, a)):
            if self.edge_owner.get(e) == tid:
                del self.edge_owner[e]

    def in_circle(self, tid, p):
        a, b, c = self.tris[tid]
        P = self.pts
        eps = 1e-13 * self.scale**2
        if c == GHOST:
            o = _orient(P[a], P[b], p)
            if o > eps:
                return True
            if abs(o) <= eps:
                # on the hull line: inside only strictly between a and b
                d = P[b] - P[a]
                t = np.dot(p - P[a], d) / np.dot(d, d)
                return 0.0 < t < 1.0
            return False
        return _incircle(P[a], P[b], P[c], p) > eps * self.scale**2

    def insert(self, i):
        p = self.pts[i]
        start = next((t for t in self.tris if self._contains(t, p)), None)
        if start is None:
            start = next(t for t in self.tris if self.in_circle(t, p))
        bad = {start}
        queue = deque([start])
        while queue:
            t = queue.popleft()
            a, b, c = self.tris[t]
            for u, v in ((a, b), (b, c), (c, a)):
                nb = self.edge_owner.get((v, u))
                if nb is not None and nb not in bad and self.in_circle(nb, p):
                    bad.add(nb)
                    queue.append(nb)
        boundary = []
        for t in sorted(bad):
            a, b, c = self.tris[t]
            for u, v in ((a, b), (b, c), (c, a)):
                nb = self.edge_owner.get((v, u))
                if nb is None or nb not in bad:
                    boundary.append((u, v))
        for t in sorted(bad):
            self.remove(t)
        for u, v in boundary:
            if u == GHOST:
                self.add((v, i, GHOST))
            elif v == GHOST:
                self.add((i, u, GHOST))
            else:
                self.add((u, v, i))

    def _contains(self, tid, p):
        a, b, c = self.tris[tid]
        if c == GHOST:
            return False
        P = self.pts
        return _orient(P[a], P[b], p) >= 0 and _orient(P[b], P[c], p) >= 0 and _orient(P[c], P[a], p) >= 0


def delaunay_triangulate(points, pattern_tag="delaunay"):
    """Delaunay triangulation of the convex hull of ``points``.

    Points are inserted in the given order; cocircular ties therefore
    resolve by insertion order.
    """
    pts = merge_duplicates(points)
    if len(pts) < 3:
        raise DegenerateGeometryError("need at least three distinct points")
    scale = float(np.ptp(pts, axis=0).max())
    eps = 1e-13 * scale**2
    k = next((j for j in range(2, len(pts)) if abs(_orient(pts[0], pts[1], pts[j])) > eps), None)
    if k is None:
        raise DegenerateGeometryError("all points are collinear")
    bw = _BowyerWatson(pts)
    a, b, c = 0, 1, k
    if _orient(pts[a], pts[b], pts[c]) < 0:
        b, c = c, b
    bw.add((a, b, c))
    bw.add((b, a, GHOST))
    bw.add((c, b, GHOST))
    bw.add((a, c, GHOST))
    for i in range(2, len(pts)):
        if i != k:
            bw.insert(i)
    tris = [t for _, t in sorted(bw.tris.items()) if GHOST not in t]
    return Triangulation.from_arrays(pts, np.array(tris, dtype=np.int64), pattern_tag=pattern_tag)


def circumcircle_violations(mesh, slack=1e-10):
    """Brute-force empty-circumcircle check; returns offending (tri, vertex) pairs."""
    P = mesh.vertices
    out = []
    for t, (a, b, c) in enumerate(mesh.triangles):
        pa, pb, pc = P[a], P[b], P[c]
        d = 2 * (pa[0] * (pb[1] - pc[1]) + pb[0] * (pc[1] - pa[1]) + pc[0] * (pa[1] - pb[1]))
        sa, sb, sc = pa @ pa, pb @ pb, pc @ pc
        ux = (sa * (pb[1] - pc[1]) + sb * (pc[1] - pa[1]) + sc * (pa[1] - pb[1])) / d
        uy = (sa * (pc[0] - pb[0]) + sb * (pa[0] - pc[0]) + sc * (pb[0] - pa[0])) / d
        r = np.hypot(pa[0] - ux, pa[1] - uy)
        dist = np.hypot(P[:, 0] - ux, P[:, 1] - uy)
        inside = np.flatnonzero(dist < r - slack)
        out.extend((t, int(v)) for v in inside if v not in (a, b, c))
    return out


def square_point_cloud(n_interior=40, boundary_spacing=1 / 8, seed=0, margin=0.09, gap=0.8):
    """Corners, equispaced boundary points and seeded interior points in the unit square.

    Interior points keep a distance ``margin`` from the boundary and a
    distance ``gap / sqrt(#points)`` from each other so that the resulting
    triangulation stays shape regular.
    """
    m = int(round(1 / boundary_spacing))
    t = np.arange(m) / m
    boundary = np.concatenate(
        [
            np.column_stack([t, np.zeros(m)]),
            np.column_stack([np.ones(m), t]),
            np.column_stack([1 - t, np.ones(m)]),
            np.column_stack([np.zeros(m), 1 - t]),
        ]
    )
    rng = np.random.default_rng(seed)
    interior = []
    min_gap = gap / np.sqrt(n_interior + len(boundary))
    for _ in range(1000 * n_interior):
        if len(interior) == n_interior:
            break
        p = rng.uniform(margin, 1 - margin, size=2)
        others = np.array(interior + boundary.tolist())
        if np.min(np.hypot(*(others - p).T)) >= min_gap:
            interior.append(p.tolist())
    if len(interior) < n_interior:
        raise ValueError("could not place the interior points; lower gap or margin")
    return np.vstack([boundary, np.array(interior)])
