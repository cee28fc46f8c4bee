"""The polyhedral complex obtained as the Hadamard-power limit of weighted
compactified amoebas.

Two constructions are provided. The direct one takes, for every simplex of
the regular triangulation, the convex hull of its edge midpoints. The
estimator samples weighted compactified amoebas of growing Hadamard powers
and tracks their Hausdorff distances. The module also analyses the
complement of a complex inside the Newton polygon and compares it with the
complement of the affine amoeba.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull, cKDTree

from .amoeba import (
    DEFAULT_RESOLUTION,
    DEFAULT_THETAS,
    FOUR_CONNECTED,
    amoeba_points,
    complement_components,
)
from .lattice import (
    LatticePolytope,
    _hull_ring_2d,
    edge_midpoints,
    is_concave_on_support,
    is_triangulation,
    lattice_points,
    subdivision_of,
    vertex_coefficient_bound,
)
from .moment import PointCloud, Sampling, wca
from .numerics import hausdorff_distance

DEFAULT_SCHEDULE = (1, 2, 4, 8, 16, 32, 64, 128, 256)
DEFAULT_COMPLEMENT_RESOLUTION = 600


class NotTriangulation(ValueError):
    """The regular subdivision has a cell that is not a simplex."""


# --- hypotheses -----------------------------------------------------------


@dataclass(frozen=True)
class HypothesisReport:
    vertex_bound: bool
    concave: bool
    concavity_witness: tuple | None
    triangulation: bool

    @property
    def eligible(self):
        return self.vertex_bound and self.concave and self.triangulation

    def failed(self):
        names = []
        if not self.vertex_bound:
            names.append("vertex coefficients of modulus at least 1")
        if not self.concave:
            names.append(f"concave lift (point {self.concavity_witness} lies below the hull)")
        if not self.triangulation:
            names.append("subdivision is a triangulation")
        return names

    def to_json(self):
        return {
            "vertex_bound": self.vertex_bound,
            "concave": self.concave,
            "concavity_witness": None if self.concavity_witness is None else list(self.concavity_witness),
            "triangulation": self.triangulation,
            "eligible": self.eligible,
        }


def check_hypotheses(f):
    """Check the three conditions under which the limit complex is the
    union of medial simplices."""
    concave, witness = is_concave_on_support(f)
    return HypothesisReport(
        vertex_coefficient_bound(f),
        concave,
        witness,
        is_triangulation(subdivision_of(f)),
    )


# --- complexes ------------------------------------------------------------


@dataclass(frozen=True)
class ComplexCell:
    """A maximal cell: its vertices (counterclockwise in the plane,
    lexicographic in space) and the simplex it was built from."""

    vertices: tuple
    dual_simplex: tuple


@dataclass(frozen=True)
class PolyhedralComplex:
    n: int
    cells: tuple

    def to_json(self):
        return {
            "n": self.n,
            "cells": [
                {"vertices": [list(v) for v in c.vertices], "dual_simplex": [list(s) for s in c.dual_simplex]}
                for c in self.cells
            ],
        }

    @classmethod
    def from_json(cls, obj):
        cells = tuple(
            ComplexCell(
                tuple(tuple(float(x) for x in v) for v in c["vertices"]),
                tuple(tuple(int(x) for x in s) for s in c["dual_simplex"]),
            )
            for c in obj["cells"]
        )
        n = obj.get("n", len(cells[0].vertices[0]) if cells else 2)
        return cls(int(n), cells)

    def vertex_set(self):
        return sorted({v for c in self.cells for v in c.vertices})

    def contains(self, points, tol=1e-9):
        """Mask of points lying in some cell (plane complexes)."""
        X = np.atleast_2d(np.asarray(points, dtype=float))
        return _distance_mask(self, X, tol)

    def sample(self, spacing):
        """Points covering every cell with the given spacing, edges and
        vertices included (plane complexes)."""
        if self.n != 2:
            raise ValueError("sampling is implemented for plane complexes")
        out = []
        for c in self.cells:
            V = np.asarray(c.vertices, dtype=float)
            for k in range(1, len(V) - 1):
                out.append(_sample_triangle(V[0], V[k], V[k + 1], spacing))
        return PointCloud(np.unique(np.concatenate(out), axis=0), "polytope")

    def adjacency_defects(self):
        """Pairs of cells whose dual simplices share a face but whose shared
        vertices differ from the midpoints of that face's edges."""
        bad = []
        for a, b in itertools.combinations(range(len(self.cells)), 2):
            ca, cb = self.cells[a], self.cells[b]
            shared = sorted(set(ca.dual_simplex) & set(cb.dual_simplex))
            if len(shared) < 2:
                continue
            if set(ca.vertices) & set(cb.vertices) != set(edge_midpoints(shared)):
                bad.append((a, b))
        return bad


def _sample_triangle(a, b, c, spacing):
    m = max(1, int(math.ceil(max(np.linalg.norm(b - a), np.linalg.norm(c - a), np.linalg.norm(c - b)) / spacing)))
    i, j = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="ij")
    keep = i + j <= m
    s = i[keep] / m
    t = j[keep] / m
    return a + s[:, None] * (b - a) + t[:, None] * (c - a)


def _distance_mask(P, X, delta):
    """Points within Euclidean distance ``delta`` of some plane cell."""
    hit = np.zeros(len(X), dtype=bool)
    for c in P.cells:
        V = np.asarray(c.vertices, dtype=float)
        box = np.all((X >= V.min(axis=0) - delta) & (X <= V.max(axis=0) + delta), axis=1) & ~hit
        if not box.any():
            continue
        Y = X[box]
        inside = np.full(len(Y), len(V) >= 3)
        near = np.zeros(len(Y), dtype=bool)
        for p, q in zip(V, np.roll(V, -1, axis=0)):
            d = q - p
            if len(V) >= 3:
                # counterclockwise ring: interior on the left of every edge
                inside &= (Y - p) @ np.array([d[1], -d[0]]) <= 0
            t = np.clip(((Y - p) @ d) / max(d @ d, 1e-300), 0.0, 1.0)
            near |= np.linalg.norm(Y - p - t[:, None] * d, axis=1) <= delta
        hit[np.flatnonzero(box)[inside | near]] = True
    return hit


def cell_skeleton(vertices):
    """Edges of the convex hull of 3D points, with coplanar hull triangles
    merged into polygonal faces."""
    V = np.asarray(vertices, dtype=float)
    hull = ConvexHull(V)
    faces: dict = {}
    for simplex, eq in zip(hull.simplices, hull.equations):
        key = tuple(np.round(eq, 9))
        faces.setdefault(key, set()).update(int(i) for i in simplex)
    edges = set()
    for idx in faces.values():
        idx = sorted(idx)
        normal = np.asarray(next(k for k, v in faces.items() if sorted(v) == idx)[:3])
        # project the face to its plane and walk its boundary
        basis = np.linalg.svd(np.eye(3) - np.outer(normal, normal))[0][:, :2]
        Q = {tuple(np.round(V[i] @ basis, 12)): i for i in idx}
        ring = _hull_ring_2d(Q.keys())
        ids = [Q[p] for p in ring]
        for a, b in zip(ids, ids[1:] + ids[:1]):
            edges.add((min(a, b), max(a, b)))
    return sorted(edges)


def direct_complex(f):
    """Union of the convex hulls of edge midpoints over the simplices of
    the regular subdivision of ``f`` (support lifted by ``log|a|``)."""
    if f.n > 3:
        raise ValueError("the direct construction supports n <= 3")
    sub = subdivision_of(f)
    if not is_triangulation(sub):
        bad = next(c for c in sub.cells if not c.is_simplex)
        raise NotTriangulation(
            f"subdivision cell with points {list(bad.points)} is not a simplex; "
            "use the limit estimator instead"
        )
    cells = []
    for cell in sub.cells:
        mids = edge_midpoints(cell)
        if f.n == 2:
            mids = _hull_ring_2d(mids)
        cells.append(ComplexCell(tuple(mids), tuple(sorted(cell.vertices))))
    return PolyhedralComplex(f.n, tuple(cells))


# --- limit estimator --------------------------------------------------------


@dataclass
class ConvergenceReport:
    r_values: list
    distances: list
    eps: float
    converged: bool
    converged_at: float | None
    experimental: bool
    sizes: list = field(default_factory=list)

    def to_json(self):
        return {
            "r_values": list(self.r_values),
            "distances": [float(d) for d in self.distances],
            "eps": float(self.eps),
            "converged": self.converged,
            "converged_at": self.converged_at,
            "experimental": self.experimental,
            "cloud_sizes": list(self.sizes),
        }


def limit_complex_estimate(f, r_schedule=DEFAULT_SCHEDULE, eps=None, sampling=Sampling(), thin_fraction=1e-3):
    """Weighted compactified amoebas along ``r_schedule`` with the Hausdorff
    distance of consecutive clouds.

    Clouds are thinned to one point per box of side ``thin_fraction *
    diam(N)``. Convergence is declared at the first consecutive pair closer
    than ``eps`` (default ``0.02 * diam(N)``); the last cloud is returned
    either way.
    """
    if f.n != 2:
        raise ValueError("the limit estimator samples plane amoebas only")
    r_schedule = [float(r) for r in r_schedule]
    if not r_schedule or any(b <= a for a, b in zip(r_schedule, r_schedule[1:])):
        raise ValueError("r schedule must be nonempty and increasing")
    diam = LatticePolytope.from_points(f.support).diameter()
    eps = 0.02 * diam if eps is None else float(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    spacing = thin_fraction * diam
    clouds, distances, sizes = [], [], []
    converged_at = None
    for r in r_schedule:
        cloud = wca(f, r, sampling).thin(spacing)
        sizes.append(len(cloud))
        if clouds:
            d = hausdorff_distance(clouds[-1].points, cloud.points)
            distances.append(d)
            if converged_at is None and d < eps:
                converged_at = r
        clouds = [cloud]
    report = ConvergenceReport(
        [_plain(r) for r in r_schedule],
        distances,
        eps,
        converged_at is not None,
        None if converged_at is None else _plain(converged_at),
        not check_hypotheses(f).eligible,
        sizes,
    )
    return clouds[-1], report


def _plain(r):
    return int(r) if float(r).is_integer() else float(r)


# --- complement in the Newton polygon ---------------------------------------


@dataclass
class ComplementRegion:
    label: int
    lattice_points: list
    size: int  # grid nodes
    touches_boundary: bool

    @property
    def order(self):
        return self.lattice_points[0] if len(self.lattice_points) == 1 else None

    @property
    def status(self):
        k = len(self.lattice_points)
        return "ok" if k == 1 else ("no_lattice_point" if k == 0 else "several_lattice_points")


@dataclass
class ComplementAnalysis:
    regions: list
    on_complex: list
    spacing: float
    notes: list

    @property
    def orders(self):
        return sorted(r.order for r in self.regions if r.order is not None)

    @property
    def flagged(self):
        return [r for r in self.regions if r.status != "ok"]

    def to_json(self):
        return {
            "spacing": self.spacing,
            "regions": [
                {
                    "lattice_points": [list(p) for p in r.lattice_points],
                    "order": None if r.order is None else list(r.order),
                    "status": r.status,
                    "nodes": r.size,
                }
                for r in self.regions
            ],
            "on_complex": [list(p) for p in self.on_complex],
            "notes": list(self.notes),
        }


def complement_analysis(P, f, resolution=DEFAULT_COMPLEMENT_RESOLUTION, cloud_radius=None, sliver_nodes=4):
    """Components of ``N`` minus a complex or a point cloud, on a node grid.

    The grid spacing is ``1/k`` with ``k`` chosen so that the longer side of
    the bounding box of ``N`` has at least ``resolution`` steps; lattice
    points and edge midpoints are grid nodes. The domain is ``N`` widened by one spacing so
    that sharp corners stay 4-connected. A node is covered when it lies within ``1.5``
    spacings of a cell, or within ``cloud_radius`` of a cloud point (default
    ``max(2 spacings, 0.01 diam(N))``). Components are 4-connected.
    Lattice-free components of at most ``sliver_nodes`` nodes, which appear
    where two cells touch at a point, are reported in the notes only.
    """
    N = LatticePolytope.from_points(f.support)
    if N.n != 2:
        raise ValueError("complement analysis is implemented in the plane")
    V = np.asarray(N.vertices, dtype=float)
    lo = V.min(axis=0)
    extent = V.max(axis=0) - lo
    k = max(2, int(math.ceil(resolution / max(extent.max(), 1.0))))
    k += k % 2  # edge midpoints become grid nodes
    h = 1.0 / k
    lo = lo - 2 * h
    nx, ny = (np.round(extent * k).astype(int) + 5).tolist()
    xs = lo[0] + np.arange(nx) * h
    ys = lo[1] + np.arange(ny) * h
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    # widen N by one step so narrow corners stay 4-connected on the grid
    domain = np.ones(len(nodes), dtype=bool)
    proper = np.ones(len(nodes), dtype=bool)
    for a, b in N.halfspaces():
        excess = (nodes @ np.asarray(a, dtype=float) - b) / math.hypot(*a)
        domain &= excess <= h
        proper &= excess < -1e-9
    domain = domain.reshape(ny, nx)
    proper = proper.reshape(ny, nx)
    notes = []
    if isinstance(P, PolyhedralComplex):
        covered = _distance_mask(P, nodes, 1.5 * h)
    elif isinstance(P, PointCloud):
        radius = max(2 * h, 0.01 * N.diameter()) if cloud_radius is None else cloud_radius
        d, _ = cKDTree(P.points).query(nodes, distance_upper_bound=radius)
        covered = np.isfinite(d)
        notes.append(f"cloud coverage radius {radius:.6g}")
    else:
        raise TypeError("complement analysis needs a PolyhedralComplex or a PointCloud")
    covered = covered.reshape(ny, nx)
    free = domain & ~covered
    labels, count = ndimage.label(free, structure=FOUR_CONNECTED)
    boundary = domain & ~ndimage.binary_erosion(domain, structure=FOUR_CONNECTED)
    regions = {}
    idx = np.arange(1, count + 1)
    sizes = ndimage.sum_labels(free, labels, idx).astype(int) if count else []
    touch = ndimage.maximum(boundary, labels, idx).astype(bool) if count else []
    real = ndimage.maximum(proper, labels, idx).astype(bool) if count else []
    for lab, size, t, keep in zip(idx, sizes, touch, real):
        # pockets without a node in the open polygon are grid artifacts
        if keep:
            regions[int(lab)] = ComplementRegion(int(lab), [], int(size), bool(t))
    on_complex = []
    for p in lattice_points(N):
        ix = int(round((p[0] - lo[0]) * k))
        iy = int(round((p[1] - lo[1]) * k))
        lab = labels[iy, ix]
        if lab == 0:
            on_complex.append(p)
        else:
            regions[int(lab)].lattice_points.append(p)
    slivers = [r for r in regions.values() if not r.lattice_points and r.size <= sliver_nodes]
    if slivers:
        notes.append(f"{len(slivers)} sliver(s) of at most {sliver_nodes} nodes ignored (thinner than the grid resolves)")
    out = [r for r in regions.values() if r not in slivers]
    out.sort(key=lambda r: (r.lattice_points or [(math.inf, math.inf)], r.label))
    empty = [r for r in out if not r.lattice_points]
    if empty:
        notes.append(f"{len(empty)} region(s) without lattice points, largest {max(r.size for r in empty)} nodes")
    return ComplementAnalysis(out, on_complex, h, notes)


# --- comparison with the affine amoeba ---------------------------------------


@dataclass
class Pi0Report:
    verdict: str
    method: str
    amoeba_orders: list
    complex_orders: list
    amoeba_count: int
    complex_count: int
    notes: list

    def to_json(self):
        return {
            "verdict": self.verdict,
            "method": self.method,
            "amoeba": {"components": self.amoeba_count, "orders": [None if o is None else list(o) for o in self.amoeba_orders]},
            "complex": {"components": self.complex_count, "orders": [None if o is None else list(o) for o in self.complex_orders]},
            "notes": list(self.notes),
        }


def complex_for(f, method="auto", sampling=Sampling(), r_schedule=DEFAULT_SCHEDULE, eps=None):
    """The direct complex when the subdivision is a triangulation (or when
    asked for), the limit estimate otherwise. Returns ``(complex or cloud,
    method, convergence report or None)``."""
    if method not in ("auto", "direct", "limit"):
        raise ValueError(f"unknown method {method!r}")
    if method == "direct" or (method == "auto" and is_triangulation(subdivision_of(f))):
        return direct_complex(f), "direct", None
    cloud, report = limit_complex_estimate(f, r_schedule, eps, sampling)
    return cloud, "limit", report


def pi0_compare(f, window=None, resolution=DEFAULT_RESOLUTION, thetas=DEFAULT_THETAS, method="auto",
                complement_resolution=DEFAULT_COMPLEMENT_RESOLUTION, seed=0, sampling=Sampling()):
    """Compare complement components of the affine amoeba with those of the
    complex inside the Newton polygon: counts and order multisets."""
    raster = amoeba_points(f, window, resolution, thetas)
    comps = complement_components(raster, seed=seed, f=f)
    amoeba_orders = [c.order for c in comps]
    P, used, report = complex_for(f, method, sampling)
    analysis = complement_analysis(P, f, complement_resolution)
    complex_orders = [r.order for r in analysis.regions]
    notes = list(analysis.notes)
    if report is not None and not report.converged:
        notes.append("limit estimate did not converge within the schedule")
    key = lambda o: (o is None, o or ())
    if any(o is None for o in amoeba_orders):
        verdict = "indeterminate"
        notes.append("some amoeba complement component has no stable order")
    elif len(comps) == len(analysis.regions) and sorted(amoeba_orders, key=key) == sorted(complex_orders, key=key):
        verdict = "match"
    else:
        verdict = "mismatch"
    return Pi0Report(
        verdict,
        used,
        sorted(amoeba_orders, key=key),
        sorted(complex_orders, key=key),
        len(comps),
        len(analysis.regions),
        notes,
    )
