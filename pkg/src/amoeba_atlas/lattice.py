"""Convex lattice polytopes, lattice points and regular subdivisions.

Regular subdivisions use the upper-hull (max) convention: a point set is
lifted by its heights and the cells are the projections of the upper facets.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import ConvexHull

HEIGHT_TOL = 1e-9


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_ring_2d(points):
    """Counterclockwise extreme points (Andrew's monotone chain, exact for
    integer input). Collinear input gives the two endpoints."""
    pts = sorted(set(tuple(p) for p in points))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    ring = lower[:-1] + upper[:-1]
    if len(ring) == 2 and ring[0] == ring[1]:
        return ring[:1]
    return ring


def _affine_frame(points):
    """Origin, orthonormal basis of the affine hull, and its dimension."""
    P = np.asarray(points, dtype=float)
    origin = P[0]
    D = P - origin
    if len(P) == 1:
        return origin, np.zeros((0, P.shape[1])), 0
    _, s, vt = np.linalg.svd(D, full_matrices=False)
    rank = int((s > 1e-9 * max(1.0, s[0])).sum())
    return origin, vt[:rank], rank


def affine_dimension(points):
    return _affine_frame(points)[2]


def _extreme_points(points):
    pts = sorted(set(tuple(p) for p in points))
    origin, basis, dim = _affine_frame(pts)
    if dim == 0:
        return pts[:1]
    Q = (np.asarray(pts, dtype=float) - origin) @ basis.T
    if dim == 1:
        t = Q[:, 0]
        return sorted({pts[int(np.argmin(t))], pts[int(np.argmax(t))]})
    if dim == 2 and len(pts[0]) == 2:
        return _hull_ring_2d(pts)
    hull = ConvexHull(Q)
    return sorted(pts[i] for i in hull.vertices)


def convex_contains(vertices, points, tol=HEIGHT_TOL):
    """Boolean mask: which ``points`` lie in the convex hull of ``vertices``
    (any affine dimension)."""
    V = np.asarray(vertices, dtype=float)
    X = np.atleast_2d(np.asarray(points, dtype=float))
    origin, basis, dim = _affine_frame(V)
    D = X - origin
    if dim > 0:
        Q = D @ basis.T
        off = D - Q @ basis
    else:
        Q = np.zeros((len(X), 0))
        off = D
    on_hull = np.linalg.norm(off, axis=1) <= tol
    if dim == 0:
        return on_hull
    QV = (V - origin) @ basis.T
    if dim == 1:
        lo, hi = QV[:, 0].min(), QV[:, 0].max()
        return on_hull & (Q[:, 0] >= lo - tol) & (Q[:, 0] <= hi + tol)
    hull = ConvexHull(QV)
    eq = hull.equations
    inside = (Q @ eq[:, :-1].T + eq[:, -1] <= tol).all(axis=1)
    return on_hull & inside


@dataclass(frozen=True)
class LatticePolytope:
    """Convex hull of a finite lattice point set.

    ``vertices`` are the extreme points, counterclockwise when the polytope
    is a polygon in the plane, lexicographic otherwise.
    """

    n: int
    vertices: tuple
    points: tuple

    @classmethod
    def from_points(cls, points):
        pts = tuple(sorted(set(tuple(int(v) for v in p) for p in points)))
        if not pts:
            raise ValueError("polytope needs at least one point")
        n = len(pts[0])
        return cls(n, tuple(_extreme_points(pts)), pts)

    @property
    def dim(self):
        return affine_dimension(self.vertices)

    def contains(self, points, tol=HEIGHT_TOL):
        return convex_contains(self.vertices, points, tol)

    def halfspaces(self):
        """Rows ``(a, b)`` with ``a . x <= b`` describing a full-dimensional
        polytope; exact integers for polygons."""
        if self.dim != self.n:
            raise ValueError("half-space form needs a full-dimensional polytope")
        if self.n == 2:
            ring = self.vertices
            rows = []
            for p, q in zip(ring, ring[1:] + ring[:1]):
                a = (q[1] - p[1], p[0] - q[0])
                rows.append((a, a[0] * p[0] + a[1] * p[1]))
            return rows
        hull = ConvexHull(np.asarray(self.vertices, dtype=float))
        return [(tuple(e[:-1]), -e[-1]) for e in hull.equations]

    def doubled_area(self):
        if self.n != 2:
            raise ValueError("area is defined for plane polygons")
        ring = self.vertices
        if len(ring) < 3:
            return 0
        return abs(sum(p[0] * q[1] - q[0] * p[1] for p, q in zip(ring, ring[1:] + ring[:1])))

    def diameter(self):
        V = np.asarray(self.vertices, dtype=float)
        if len(V) < 2:
            return 0.0
        return float(max(np.linalg.norm(a - b) for a, b in itertools.combinations(V, 2)))

    def boundary_lattice_count(self):
        ring = self.vertices
        if self.n != 2:
            raise ValueError("boundary count implemented for plane polygons")
        if len(ring) == 1:
            return 1
        if len(ring) == 2:
            p, q = ring
            return math.gcd(abs(q[0] - p[0]), abs(q[1] - p[1])) + 1
        return sum(
            math.gcd(abs(q[0] - p[0]), abs(q[1] - p[1])) for p, q in zip(ring, ring[1:] + ring[:1])
        )

    def on_boundary(self, points, tol=HEIGHT_TOL):
        """Mask of points on the relative boundary (polygons only)."""
        X = np.atleast_2d(np.asarray(points, dtype=float))
        rows = self.halfspaces()
        out = np.zeros(len(X), dtype=bool)
        for a, b in rows:
            norm = math.hypot(*a)
            out |= np.abs(X @ np.asarray(a, dtype=float) - b) <= tol * norm
        return out & self.contains(X, tol)


def convex_hull_2d(points):
    pts = [tuple(int(v) for v in p) for p in points]
    if not pts or any(len(p) != 2 for p in pts):
        raise ValueError("convex_hull_2d needs at least one plane point")
    return LatticePolytope(2, tuple(_hull_ring_2d(pts)), tuple(sorted(set(pts))))


def lattice_points(P):
    """All integer points of ``P``, boundary included, lexicographic."""
    if P.n > 3:
        raise ValueError("lattice point enumeration supports n <= 3")
    V = np.asarray(P.vertices, dtype=int)
    lo, hi = V.min(axis=0), V.max(axis=0)
    grids = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo, hi)], indexing="ij")
    cand = np.stack([g.ravel() for g in grids], axis=1)
    inside = P.contains(cand)
    return sorted(tuple(int(v) for v in p) for p in cand[inside])


# --- regular subdivisions ----------------------------------------------


@dataclass(frozen=True)
class Cell:
    """A cell of a subdivision.

    ``points`` are all lifted points on the cell's facet (the marked points),
    ``vertices`` the extreme ones. ``lift`` holds ``(c, d)`` of the facet
    plane ``height = <c, alpha> + d`` when the cell comes from a lifting.
    """

    vertices: tuple
    points: tuple
    dim: int
    lift: tuple | None = None

    @classmethod
    def from_vertices(cls, vertices):
        pts = tuple(sorted(set(tuple(int(v) for v in p) for p in vertices)))
        ext = _extreme_points(pts)
        return cls(tuple(ext), pts, affine_dimension(pts))

    @property
    def is_simplex(self):
        return len(self.points) == self.dim + 1 and len(self.vertices) == self.dim + 1

    def doubled_area(self):
        ring = self.vertices
        if len(ring[0]) != 2 or len(ring) < 3:
            return 0
        return abs(sum(p[0] * q[1] - q[0] * p[1] for p, q in zip(ring, ring[1:] + ring[:1])))

    def edges(self):
        """Edges between consecutive vertices (polygons only)."""
        ring = self.vertices
        return [tuple(sorted((p, q))) for p, q in zip(ring, ring[1:] + ring[:1])]


@dataclass(frozen=True)
class RegularSubdivision:
    polytope: LatticePolytope
    cells: tuple
    used: tuple  # lifted points that are vertices of some cell
    points: tuple
    heights: tuple

    def hull_value(self, alpha):
        """Value of the upper hull (concave envelope) at ``alpha``."""
        a = np.asarray(alpha, dtype=float)
        return min(float(np.dot(c.lift[0], a) + c.lift[1]) for c in self.cells)


def _solve_plane(pts, hs):
    """Coefficients (c, d) of the affine function through lifted points."""
    A = np.hstack([np.asarray(pts, dtype=float), np.ones((len(pts), 1))])
    sol = np.linalg.solve(A, np.asarray(hs, dtype=float))
    return sol[:-1], sol[-1]


def regular_subdivision(points, heights, tol=HEIGHT_TOL, jitter=0.0, seed=0):
    """Subdivision induced by lifting ``points`` to ``heights``.

    Enumerates every affinely independent (n+1)-subset, keeps the planes
    lying weakly above all lifted points, and projects them. Coplanar lifted
    points stay in one (non-simplex) cell; pass ``jitter > 0`` to perturb
    heights deterministically instead.
    """
    pts = [tuple(int(v) for v in p) for p in points]
    hs = np.asarray(heights, dtype=float)
    if len(pts) != len(hs):
        raise ValueError("one height per point is required")
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    if jitter:
        hs = hs + jitter * np.random.default_rng(seed).uniform(-1.0, 1.0, len(hs))
    n = len(pts[0])
    P = np.asarray(pts, dtype=float)
    if affine_dimension(pts) < n:
        raise ValueError("points do not affinely span the ambient space")
    polytope = LatticePolytope.from_points(pts)

    seen = {}
    for combo in itertools.combinations(range(len(pts)), n + 1):
        base = np.asarray([pts[i] for i in combo], dtype=np.int64)
        if round(np.linalg.det((base[1:] - base[0]).astype(float))) == 0:
            continue
        c, d = _solve_plane(base, hs[list(combo)])
        plane = P @ c + d
        if np.any(hs > plane + tol):
            continue
        marked = tuple(i for i in range(len(pts)) if hs[i] >= plane[i] - tol)
        if marked in seen:
            continue
        # refit on all marked points so the stored plane does not depend on
        # which triple found the facet
        sub = [pts[i] for i in marked]
        A = np.hstack([P[list(marked)], np.ones((len(marked), 1))])
        sol = np.linalg.lstsq(A, hs[list(marked)], rcond=None)[0]
        ext = _extreme_points(sub)
        seen[marked] = Cell(tuple(ext), tuple(sorted(sub)), n, (tuple(sol[:-1]), float(sol[-1])))
    cells = tuple(sorted(seen.values(), key=lambda c: c.points))
    used = tuple(sorted({v for c in cells for v in c.vertices}))
    return RegularSubdivision(polytope, cells, used, tuple(pts), tuple(float(h) for h in hs))


def subdivision_of(f, r=1.0, **kw):
    """Regular subdivision of the support of ``f`` lifted by ``r log|a|``."""
    return regular_subdivision(f.support, r * f.log_moduli(), **kw)


def is_triangulation(subdivision):
    return all(c.is_simplex for c in subdivision.cells)


def is_concave_on_support(f, tol=HEIGHT_TOL):
    """Whether every lifted support point lies on the upper hull.

    Returns ``(ok, witness)`` where the witness is the first support point
    lifted strictly below the hull, or ``None``.
    """
    if len(f.terms) == 1:
        return True, None
    support = f.support
    if affine_dimension(support) < f.n:
        # a lower-dimensional support is lifted inside its own affine hull
        origin, basis, dim = _affine_frame(support)
        if dim == 0:
            return True, None
        coords = (np.asarray(support, dtype=float) - origin) @ basis.T
        return _concave_lower_dim(coords, f.log_moduli(), support, tol)
    sub = subdivision_of(f)
    for alpha, h in zip(sub.points, sub.heights):
        if h < sub.hull_value(alpha) - tol:
            return False, alpha
    return True, None


def _concave_lower_dim(coords, heights, support, tol):
    k = coords.shape[1]
    ok_planes = []
    for combo in itertools.combinations(range(len(coords)), k + 1):
        A = np.hstack([coords[list(combo)], np.ones((k + 1, 1))])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        sol = np.linalg.solve(A, heights[list(combo)])
        vals = coords @ sol[:-1] + sol[-1]
        if np.all(heights <= vals + tol):
            ok_planes.append(vals)
    env = np.min(ok_planes, axis=0)
    for alpha, h, e in zip(support, heights, env):
        if h < e - tol:
            return False, alpha
    return True, None


def vertex_coefficient_bound(f):
    """Every coefficient at a vertex of the Newton polytope has modulus >= 1."""
    P = LatticePolytope.from_points(f.support)
    return all(abs(f.coefficient(v)) >= 1.0 - 1e-12 for v in P.vertices)


def edge_midpoints(cell):
    """Midpoints of all edges of a simplex, as exact half-integer floats."""
    verts = cell.vertices if isinstance(cell, Cell) else tuple(tuple(v) for v in cell)
    dim = affine_dimension(verts)
    if len(verts) != dim + 1:
        raise ValueError("edge midpoints need a simplex")
    mids = {
        tuple(float(Fraction(a + b, 2)) for a, b in zip(p, q))
        for p, q in itertools.combinations(verts, 2)
    }
    return sorted(mids)


def subdivision_to_json(sub):
    return {
        "cells": [
            {"vertices": [list(v) for v in c.vertices], "points": [list(p) for p in c.points]}
            for c in sub.cells
        ]
    }
