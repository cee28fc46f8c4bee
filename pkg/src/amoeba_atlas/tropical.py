"""Tropical polynomials ``max_i (h_i + <alpha_i, zeta>)`` and plane tropical
curves, built by duality from the regular subdivision."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import HEIGHT_TOL, affine_dimension, regular_subdivision

TIE_TOL = HEIGHT_TOL


@dataclass(frozen=True)
class TropicalPolynomial:
    exponents: tuple
    heights: tuple

    def __post_init__(self):
        if len(self.exponents) != len(self.heights):
            raise ValueError("one height per exponent is required")
        if len(set(self.exponents)) != len(self.exponents):
            raise ValueError("exponents must be distinct")

    @classmethod
    def from_polynomial(cls, f, r=1.0):
        return cls(tuple(f.support), tuple(float(h) for h in r * f.log_moduli()))

    @property
    def n(self):
        return len(self.exponents[0])

    def subdivision(self):
        return regular_subdivision(self.exponents, self.heights)


def tropical_eval(T, zeta, tol=TIE_TOL):
    """Value of the max and the set of exponents attaining it."""
    vals = np.asarray(T.heights) + np.asarray(T.exponents, dtype=float) @ np.asarray(zeta, dtype=float)
    top = float(vals.max())
    arg = {T.exponents[i] for i in np.nonzero(vals >= top - tol)[0]}
    return top, arg


def _primitive(v):
    g = math.gcd(abs(v[0]), abs(v[1]))
    return (v[0] // g, v[1] // g), g


@dataclass(frozen=True)
class TropicalCurve:
    """Vertices, bounded edges and rays of a plane tropical curve.

    ``edges`` hold ``(i, j, dual_edge, weight)``; ``rays`` hold ``(i,
    direction, dual_edge, weight)`` with primitive integer directions.
    ``cells`` lists the dual cell of every vertex, in vertex order.
    """

    vertices: tuple
    edges: tuple
    rays: tuple
    cells: tuple

    def is_empty(self):
        return not self.vertices

    def edge_direction(self, k):
        """Primitive direction of bounded edge ``k`` leaving its first vertex."""
        a, _, (p, q), _ = self.edges[k]
        return _outward_normal(self.cells[a], p, q)

    def directions_at(self, i):
        """Outgoing (primitive direction, weight) pairs at vertex ``i``."""
        out = []
        for k, (a, b, _, w) in enumerate(self.edges):
            if i == a:
                out.append((self.edge_direction(k), w))
            elif i == b:
                d = self.edge_direction(k)
                out.append(((-d[0], -d[1]), w))
        out.extend((d, w) for a, d, _, w in self.rays if a == i)
        return out

    def balancing_defects(self):
        """Weighted direction sum at every vertex (all zero when balanced)."""
        return [
            tuple(sum(d[k] * w for d, w in self.directions_at(i)) for k in range(2))
            for i in range(len(self.vertices))
        ]


def _outward_normal(cell, p, q):
    """Primitive normal of cell edge pq pointing away from the cell."""
    v = (q[0] - p[0], q[1] - p[1])
    normal, _ = _primitive((v[1], -v[0]))
    # any cell vertex off the edge lies on the inner side
    for w in cell.vertices:
        if w not in (p, q):
            side = normal[0] * (w[0] - p[0]) + normal[1] * (w[1] - p[1])
            if side > 0:
                normal = (-normal[0], -normal[1])
            break
    return normal


def tropical_curve_2d(T):
    """Corner locus of a plane tropical polynomial.

    Each maximal cell of the dual subdivision contributes the vertex where
    its terms tie; interior cell edges become bounded edges and boundary
    edges become rays along the outer normal.
    """
    if T.n != 2:
        raise ValueError("tropical curves are computed in the plane only")
    if len(T.exponents) == 1:
        return TropicalCurve((), (), (), ())
    if affine_dimension(T.exponents) < 2:
        raise ValueError("exponents do not span the plane; the curve is a union of parallel lines")
    sub = T.subdivision()
    cells = sub.cells
    vertices = tuple(tuple(0.0 - float(c) for c in cell.lift[0]) for cell in cells)
    owners: dict = {}
    for i, cell in enumerate(cells):
        for e in cell.edges():
            owners.setdefault(e, []).append(i)
    edges = []
    rays = []
    for e in sorted(owners):
        p, q = e
        _, weight = _primitive((q[0] - p[0], q[1] - p[1]))
        own = owners[e]
        if len(own) == 2:
            edges.append((own[0], own[1], e, weight))
        elif len(own) == 1:
            rays.append((own[0], _outward_normal(cells[own[0]], p, q), e, weight))
        else:
            raise RuntimeError(f"subdivision edge {e} is shared by {len(own)} cells")
    return TropicalCurve(vertices, tuple(edges), tuple(rays), cells)


def tropical_orders(T):
    """Exponents whose region of unique maximality has nonempty interior."""
    if len(T.exponents) == 1:
        return set(T.exponents)
    return set(T.subdivision().used)


def curve_to_json(curve):
    return {
        "vertices": [list(v) for v in curve.vertices],
        "edges": [[a, b] for a, b, _, _ in curve.edges],
        "edge_weights": [w for *_, w in curve.edges],
        "rays": [{"vertex": a, "direction": list(d), "weight": w} for a, d, _, w in curve.rays],
    }


def vertex_bounding_box(f, r=1.0):
    """Bounding box (x0, x1, y0, y1) of the tropical curve vertices of the
    Hadamard power ``f^[r]``; the single vertex of a degenerate curve is its
    own box, an empty curve gives the origin."""
    T = TropicalPolynomial.from_polynomial(f, r)
    curve = tropical_curve_2d(T)
    if curve.is_empty():
        return 0.0, 0.0, 0.0, 0.0
    V = np.asarray(curve.vertices)
    return float(V[:, 0].min()), float(V[:, 0].max()), float(V[:, 1].min()), float(V[:, 1].max())
