"""Affine amoebas in the plane: fiber sampling, rasters, membership,
complement orders and solid/optimal classification.

Everything works on log-polar data (log-modulus, argument), so Hadamard
powers with huge coefficients are handled without overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .lattice import LatticePolytope, lattice_points
from .numerics import fiber_roots, maximize_margin
from .poly import hadamard_log_coefficients
from .tropical import vertex_bounding_box

TWO_PI = 2.0 * math.pi
DEFAULT_PAD = 3.0
DEFAULT_RESOLUTION = (400, 400)
DEFAULT_THETAS = 256
DEFAULT_DRAWS = 8

FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class Window:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"window is not well ordered: {self}")

    @classmethod
    def parse(cls, text):
        vals = [float(v) for v in text.split(",")]
        if len(vals) != 4:
            raise ValueError("window needs four numbers x0,x1,y0,y1")
        return cls(*vals)

    def axis_range(self, axis):
        return (self.x0, self.x1) if axis == 0 else (self.y0, self.y1)

    def as_list(self):
        return [self.x0, self.x1, self.y0, self.y1]


def default_window(f, r=1.0, pad=DEFAULT_PAD):
    """Tropical vertex bounding box of ``f^[r]`` padded by ``pad``."""
    x0, x1, y0, y1 = vertex_bounding_box(f, r)
    return Window(x0 - pad, x1 + pad, y0 - pad, y1 + pad)


def _check_plane(f):
    if f.n != 2:
        raise ValueError("amoeba sampling is implemented for n = 2")
    for axis in (0, 1):
        lo, hi = f.degree_range(axis)
        if lo == hi:
            raise ValueError(f"polynomial does not depend on variable {axis + 1}")


def fiber_log_coefficients(f, axis, fixed_log, fixed_arg, r=1.0):
    """Log-polar coefficients of ``f^[r]`` as a polynomial in variable
    ``axis`` with the other variable at ``exp(fixed_log + i fixed_arg)``.

    Returns ``(L, P, dmin)``; column k is the coefficient of ``t**(k +
    dmin)``.
    """
    E = f.exponent_array()
    logm, ph = hadamard_log_coefficients(f, r)
    j = E[:, axis]
    i = E[:, 1 - axis]
    fixed_log = np.atleast_1d(np.asarray(fixed_log, dtype=float))
    fixed_arg = np.atleast_1d(np.asarray(fixed_arg, dtype=float))
    dmin = int(j.min())
    m = int(j.max()) - dmin + 1
    T = logm[None, :] + fixed_log[:, None] * i[None, :]
    A = ph[None, :] + fixed_arg[:, None] * i[None, :]
    L = np.full((len(fixed_log), m), -np.inf)
    P = np.zeros((len(fixed_log), m))
    for s in range(m):
        cols = np.nonzero(j - dmin == s)[0]
        if cols.size == 0:
            continue
        if cols.size == 1:
            L[:, s] = T[:, cols[0]]
            P[:, s] = A[:, cols[0]]
            continue
        M = T[:, cols].max(axis=1)
        S = np.exp(T[:, cols] - M[:, None] + 1j * A[:, cols]).sum(axis=1)
        with np.errstate(divide="ignore"):
            L[:, s] = M + np.log(np.abs(S))
        P[:, s] = np.angle(S)
    return L, P, dmin


def solve_fibers(f, axis, fixed_log, fixed_arg, r=1.0):
    """Root log-moduli and arguments of many fibers, shape (B, degree)."""
    L, P, dmin = fiber_log_coefficients(f, axis, fixed_log, fixed_arg, r)
    la, ar = fiber_roots(L, P)
    return la, ar, dmin


@dataclass
class HypersurfaceSample:
    """Points of the hypersurface stored as log-moduli and arguments."""

    log_abs: np.ndarray  # (N, 2)
    arg: np.ndarray  # (N, 2)
    r: float = 1.0

    def __len__(self):
        return len(self.log_abs)

    def points(self):
        """Complex coordinates; only meaningful when they fit in doubles."""
        return np.exp(self.log_abs + 1j * self.arg)


def _sweep(f, axis, fixed_values, thetas, r, window):
    fixed_values = np.asarray(fixed_values, dtype=float)
    th = np.asarray(thetas, dtype=float)
    F = np.repeat(fixed_values, len(th))
    A = np.tile(th, len(fixed_values))
    la, ar, _ = solve_fibers(f, axis, F, A, r)
    lo, hi = window.axis_range(axis)
    keep = np.isfinite(la) & (la >= lo) & (la <= hi)
    rows, cols = np.nonzero(keep)
    log_abs = np.empty((rows.size, 2))
    arg = np.empty((rows.size, 2))
    log_abs[:, axis] = la[rows, cols]
    log_abs[:, 1 - axis] = F[rows]
    arg[:, axis] = ar[rows, cols]
    arg[:, 1 - axis] = A[rows]
    return log_abs, arg


def theta_grid(thetas):
    return TWO_PI * np.arange(thetas) / thetas


def sample_hypersurface(f, window, thetas=DEFAULT_THETAS, slices=400, r=1.0, extra_slices=None):
    """Sample ``f^[r] = 0`` along vertical and horizontal fibers.

    For ``slices`` equally spaced values of one log-coordinate and
    ``thetas`` equally spaced arguments, the other coordinate is solved for;
    roots whose log-modulus falls inside the window are kept. The second
    sweep exchanges the variables. ``extra_slices`` adds fixed values per
    axis, as a pair of arrays.
    """
    _check_plane(f)
    th = theta_grid(thetas)
    parts = []
    for axis in (1, 0):
        fixed_axis = 1 - axis
        lo, hi = window.axis_range(fixed_axis)
        values = np.linspace(lo, hi, slices)
        if extra_slices is not None and extra_slices[fixed_axis] is not None:
            extra = np.asarray(extra_slices[fixed_axis], dtype=float)
            values = np.union1d(values, extra[(extra >= lo) & (extra <= hi)])
        parts.append(_sweep(f, axis, values, th, r, window))
    log_abs = np.concatenate([p[0] for p in parts])
    arg = np.concatenate([p[1] for p in parts])
    return HypersurfaceSample(log_abs, arg, r)


# --- rasters --------------------------------------------------------------


@dataclass
class AmoebaRaster:
    """Occupancy grid of the amoeba over a window.

    ``occupancy[iy, ix]`` covers ``[x0 + ix*hx, x0 + (ix+1)*hx] x [y0 +
    iy*hy, ...]``. ``points`` are the sampled amoeba points (log space);
    ``bridged`` counts cells filled by interpolation after the refinement
    budget ran out.
    """

    window: Window
    occupancy: np.ndarray
    points: np.ndarray
    phases: np.ndarray
    bridged: int = 0
    r: float = 1.0

    @property
    def shape(self):
        return self.occupancy.shape

    @property
    def cell_size(self):
        ny, nx = self.occupancy.shape
        return (self.window.x1 - self.window.x0) / nx, (self.window.y1 - self.window.y0) / ny

    def cell_centers(self, axis):
        ny, nx = self.occupancy.shape
        hx, hy = self.cell_size
        if axis == 0:
            return self.window.x0 + (np.arange(nx) + 0.5) * hx
        return self.window.y0 + (np.arange(ny) + 0.5) * hy

    def center_of(self, iy, ix):
        hx, hy = self.cell_size
        return self.window.x0 + (ix + 0.5) * hx, self.window.y0 + (iy + 0.5) * hy

    def cell_of(self, u):
        hx, hy = self.cell_size
        return int((u[1] - self.window.y0) // hy), int((u[0] - self.window.x0) // hx)


def _order_stats(la):
    s = np.where(np.isnan(la), np.inf, la)
    return np.sort(s, axis=-1)


def _refined_sections(f, axis, fixed_values, thetas, r, lo, hi, h, max_rounds=24):
    """Adaptively refine the argument grid of each fiber until consecutive
    order statistics of root log-moduli differ by at most ``h`` (after
    clipping to the window). Returns per fixed value ``(theta, stats,
    args)`` sorted by theta."""
    base = theta_grid(thetas)
    nf = len(fixed_values)
    F = np.repeat(fixed_values, thetas)
    A = np.tile(base, nf)
    la, ar, _ = solve_fibers(f, axis, F, A, r)
    order = np.argsort(np.where(np.isnan(la), np.inf, la), axis=1)
    la = np.take_along_axis(la, order, axis=1)
    ar = np.take_along_axis(ar, order, axis=1)
    k = la.shape[1]
    th_list = [base.copy() for _ in range(nf)]
    st_list = [x for x in la.reshape(nf, thetas, k)]
    ar_list = [x for x in ar.reshape(nf, thetas, k)]
    min_step = TWO_PI / 2**22

    def clipped(S):
        S = np.where(np.isnan(S), np.inf, S)
        return np.clip(S, lo - h, hi + h)

    for _ in range(max_rounds):
        owners, mids = [], []
        for q in range(nf):
            th = th_list[q]
            C = clipped(st_list[q])
            gap = np.abs(C - np.roll(C, -1, axis=0)).max(axis=1) if k else np.zeros(len(th))
            dth = np.diff(np.append(th, th[0] + TWO_PI))
            need = (gap > h) & (dth > min_step)
            if need.any():
                mids.append((th[need] + dth[need] / 2) % TWO_PI)
                owners.append(np.full(int(need.sum()), q))
        if not mids:
            break
        own = np.concatenate(owners)
        mid = np.concatenate(mids)
        la, ar, _ = solve_fibers(f, axis, fixed_values[own], mid, r)
        order = np.argsort(np.where(np.isnan(la), np.inf, la), axis=1)
        la = np.take_along_axis(la, order, axis=1)
        ar = np.take_along_axis(ar, order, axis=1)
        for q in np.unique(own):
            sel = own == q
            th = np.concatenate([th_list[q], mid[sel]])
            o = np.argsort(th, kind="stable")
            th_list[q] = th[o]
            st_list[q] = np.concatenate([st_list[q], la[sel]])[o]
            ar_list[q] = np.concatenate([ar_list[q], ar[sel]])[o]
    return th_list, st_list, ar_list


def amoeba_points(f, window=None, resolution=DEFAULT_RESOLUTION, thetas=DEFAULT_THETAS, r=1.0):
    """Raster of the amoeba of ``f^[r]``.

    Every column is sampled at its center ``u1`` and every row at its center
    ``u2``. Along each fiber the k-th smallest root log-modulus is a
    continuous function of the argument, so its range over the circle is
    exactly the k-th piece of the section; the argument grid is refined
    until consecutive samples fall in adjacent cells. An unoccupied cell
    therefore has its center cross outside the amoeba, and 4-adjacent
    unoccupied cells lie in one complement component.
    """
    _check_plane(f)
    if window is None:
        window = default_window(f, r)
    nx, ny = resolution
    occ = np.zeros((ny, nx), dtype=bool)
    raster = AmoebaRaster(window, occ, np.empty((0, 2)), np.empty((0, 2)), 0, r)
    hx, hy = raster.cell_size
    pts, phs = [], []
    bridged = 0
    for axis in (1, 0):
        fixed_axis = 1 - axis
        fixed = raster.cell_centers(fixed_axis)
        lo, hi = window.axis_range(axis)
        h = hy if axis == 1 else hx
        ncell = ny if axis == 1 else nx
        th_list, st_list, ar_list = _refined_sections(f, axis, fixed, thetas, r, lo, hi, h)
        for q, (th, S, AR) in enumerate(zip(th_list, st_list, ar_list)):
            if S.shape[1] == 0:
                continue
            finite = np.isfinite(S) & (S >= lo) & (S < hi)
            with np.errstate(invalid="ignore"):
                idx = np.floor((np.where(finite, S, lo) - lo) / h).astype(np.int64)
            cells = np.unique(np.clip(idx[finite], 0, ncell - 1))
            if axis == 1:
                occ[cells, q] = True
            else:
                occ[q, cells] = True
            rows, ks = np.nonzero(finite)
            p = np.empty((rows.size, 2))
            ph = np.empty((rows.size, 2))
            p[:, axis] = S[rows, ks]
            p[:, fixed_axis] = fixed[q]
            ph[:, axis] = AR[rows, ks]
            ph[:, fixed_axis] = th[rows]
            pts.append(p)
            phs.append(ph)
            # bridge leftover jumps between consecutive samples
            C = np.clip(np.where(np.isnan(S), np.inf, S), lo - h, hi + h)
            Cn = np.roll(C, -1, axis=0)
            big = np.abs(C - Cn) > h
            if big.any():
                for a, b in zip(C[big], Cn[big]):
                    i0 = int(np.floor((max(min(a, b), lo) - lo) / h))
                    i1 = int(np.floor((min(max(a, b), hi - 1e-12) - lo) / h))
                    if i1 < i0:
                        continue
                    span = np.arange(max(i0, 0), min(i1, ncell - 1) + 1)
                    if axis == 1:
                        new = ~occ[span, q]
                        occ[span, q] = True
                    else:
                        new = ~occ[q, span]
                        occ[q, span] = True
                    bridged += int(new.sum())
    raster.points = np.concatenate(pts) if pts else np.empty((0, 2))
    raster.phases = np.concatenate(phs) if phs else np.empty((0, 2))
    raster.bridged = bridged
    return raster


# --- membership and orders -----------------------------------------------


@dataclass(frozen=True)
class Membership:
    inside: bool
    distance: float


def _section_distance(f, axis, fixed, target, thetas, r):
    th = theta_grid(thetas)
    la, _, _ = solve_fibers(f, axis, np.full(thetas, fixed), th, r)
    S = _order_stats(la)
    best = np.inf
    for k in range(S.shape[1]):
        col = S[:, k]
        col = col[np.isfinite(col)]
        if col.size == 0:
            continue
        lo, hi = col.min(), col.max()
        d = 0.0 if lo <= target <= hi else min(abs(target - lo), abs(target - hi))
        best = min(best, d)
    return best


def default_membership_tol(f, r=1.0):
    w = default_window(f, r)
    nx, ny = DEFAULT_RESOLUTION
    return 2.0 * math.hypot((w.x1 - w.x0) / nx, (w.y1 - w.y0) / ny)


def membership(f, u, tol=None, thetas=DEFAULT_THETAS, r=1.0):
    """Whether ``u`` lies in the amoeba, with the smallest log-distance from
    ``u`` to a fiber section through it (vertical or horizontal)."""
    _check_plane(f)
    if tol is None:
        tol = default_membership_tol(f, r)
    dy = _section_distance(f, 1, u[0], u[1], thetas, r)
    dx = _section_distance(f, 0, u[1], u[0], thetas, r)
    d = float(min(dx, dy))
    return Membership(d <= tol, d)


@dataclass(frozen=True)
class OrderResult:
    order: tuple | None
    status: str  # "ok" | "indeterminate" | "on_circle"


def orders_at(f, U, draws=DEFAULT_DRAWS, seed=0, r=1.0, circle_tol=1e-9):
    """Complement orders of many points by root counting.

    For coordinate j the other variable is put on its torus circle at
    ``draws`` seeded random arguments; the order is the lowest Laurent degree
    in ``x_j`` plus the number of fiber roots with ``log|t| < u_j``. Returns
    ``(orders (N, 2), ok (N,), on_circle (N,))``; ``ok`` requires every draw
    to agree.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    N = len(U)
    rng = np.random.default_rng(seed)
    args = rng.uniform(0.0, TWO_PI, draws)
    counts = np.zeros((N, draws, 2), dtype=np.int64)
    on_circle = np.zeros(N, dtype=bool)
    for j in (0, 1):
        fixed = np.repeat(U[:, 1 - j], draws)
        arg = np.tile(args, N)
        la, _, dmin = solve_fibers(f, j, fixed, arg, r)
        target = np.repeat(U[:, j], draws)[:, None]
        with np.errstate(invalid="ignore"):
            below = (la < target) & ~np.isnan(la)
            near = np.abs(la - target) <= circle_tol
        counts[:, :, j] = (below.sum(axis=1) + dmin).reshape(N, draws)
        on_circle |= near.any(axis=1).reshape(N, draws).any(axis=1)
    agree = (counts == counts[:, :1, :]).all(axis=(1, 2))
    ok = agree & ~on_circle
    return counts[:, 0, :], ok, on_circle


def order_of_point(f, u, draws=DEFAULT_DRAWS, seed=0, r=1.0):
    _check_plane(f)
    orders, ok, near = orders_at(f, np.asarray([u], dtype=float), draws, seed, r)
    if near[0]:
        return OrderResult(None, "on_circle")
    if not ok[0]:
        return OrderResult(None, "indeterminate")
    return OrderResult(tuple(int(v) for v in orders[0]), "ok")


# --- complement components ---------------------------------------------


@dataclass
class ComplementComponent:
    label: int
    representative: tuple
    clearance: float  # log-distance from the representative to the raster
    size: int  # number of raster cells
    bounded: bool
    order: tuple | None = None
    order_status: str = "unknown"


def complement_components(raster, draws=DEFAULT_DRAWS, seed=0, f=None):
    """4-connected components of the unoccupied cells, each with a
    representative point of maximal clearance and, when ``f`` is given, its
    order."""
    free = ~raster.occupancy
    labels, count = ndimage.label(free, structure=FOUR_CONNECTED)
    hx, hy = raster.cell_size
    dist = ndimage.distance_transform_edt(free, sampling=(hy, hx))
    border = np.zeros_like(free)
    border[0, :] = border[-1, :] = border[:, 0] = border[:, -1] = True
    comps = []
    if count == 0:
        return comps
    idx = np.arange(1, count + 1)
    sizes = ndimage.sum_labels(free, labels, idx).astype(int)
    touches = ndimage.maximum(border, labels, idx).astype(bool)
    best = ndimage.maximum_position(dist, labels, idx)
    for lab, size, touch, pos in zip(idx, sizes, touches, best):
        iy, ix = pos
        comps.append(
            ComplementComponent(
                int(lab),
                raster.center_of(iy, ix),
                float(dist[iy, ix]),
                int(size),
                not bool(touch),
            )
        )
    if f is not None and comps:
        U = np.asarray([c.representative for c in comps])
        orders, ok, near = orders_at(f, U, draws, seed, raster.r)
        for c, o, good, on in zip(comps, orders, ok, near):
            c.order = tuple(int(v) for v in o) if good else None
            c.order_status = "ok" if good else ("on_circle" if on else "indeterminate")
    return comps


def component_labels(raster):
    labels, _ = ndimage.label(~raster.occupancy, structure=FOUR_CONNECTED)
    return labels


# --- classification -----------------------------------------------------


@dataclass
class Classification:
    verdict: str
    realized: list
    lattice: list
    vertices: list
    evidence: dict
    raster_orders: list
    notes: list

    @property
    def missing(self):
        return sorted(set(self.lattice) - set(self.realized))

    def to_json(self):
        return {
            "verdict": self.verdict,
            "realized_orders": [list(a) for a in self.realized],
            "missing_orders": [list(a) for a in self.missing],
            "lattice_points": [list(a) for a in self.lattice],
            "vertices": [list(a) for a in self.vertices],
            "evidence": {f"{a[0]},{a[1]}": ev for a, ev in sorted(self.evidence.items())},
            "raster_orders": [None if o is None else list(o) for o in self.raster_orders],
            "notes": list(self.notes),
        }


def classify(f, window=None, resolution=DEFAULT_RESOLUTION, thetas=DEFAULT_THETAS, draws=DEFAULT_DRAWS, seed=0, raster=None):
    """Solid / optimal / neither verdict with per-order evidence.

    Orders are collected from the vertices of the Newton polygon (always
    realized), positive lopsidedness margins, root-count probes at the margin
    maximizers, and the raster complement components.
    """
    _check_plane(f)
    N = LatticePolytope.from_points(f.support)
    lattice = lattice_points(N)
    verts = sorted(N.vertices)
    evidence = {a: [] for a in lattice}
    notes = []
    for v in verts:
        evidence[v].append("vertex")
    support = set(f.support)
    for a in lattice:
        if a in verts or a not in support:
            continue
        res = maximize_margin(f, a)
        if res.certified:
            evidence[a].append("lopsided")
            continue
        order, ok, _ = orders_at(f, res.u[None, :], draws, seed)
        if ok[0] and tuple(int(v) for v in order[0]) == a and not membership(f, res.u, tol=0.0, thetas=thetas).inside:
            evidence[a].append("probe")
    if raster is None:
        raster = amoeba_points(f, window, resolution, thetas)
    comps = complement_components(raster, draws, seed, f)
    raster_orders = [c.order for c in comps]
    indeterminate = False
    lattice_set = set(lattice)
    for c in comps:
        if c.order is None:
            indeterminate = True
            notes.append(f"component at {c.representative} has no stable order ({c.order_status})")
        elif c.order not in lattice_set:
            indeterminate = True
            notes.append(f"component order {c.order} lies outside the Newton polygon")
        elif "raster" not in evidence[c.order]:
            evidence[c.order].append("raster")
    seen = [o for o in raster_orders if o is not None]
    if len(seen) != len(set(seen)):
        notes.append("raster split one complement component into several pieces")
    if raster.bridged:
        notes.append(f"{raster.bridged} raster cells were bridged without a sample")
    realized = sorted(a for a, ev in evidence.items() if ev)
    if indeterminate:
        verdict = "indeterminate"
    elif realized == lattice:
        verdict = "optimal"
    elif realized == verts:
        verdict = "solid"
    else:
        verdict = "neither"
    return Classification(verdict, realized, lattice, verts, evidence, raster_orders, notes)


def raster_to_json(raster):
    """Window, shape and row-major run-length encoding of the occupancy,
    starting with a run of unoccupied cells."""
    flat = raster.occupancy.ravel().astype(np.int8)
    change = np.flatnonzero(np.diff(flat)) + 1
    bounds = np.concatenate([[0], change, [flat.size]])
    runs = np.diff(bounds).tolist()
    if flat.size and flat[0] == 1:
        runs = [0] + runs
    ny, nx = raster.occupancy.shape
    return {"window": raster.window.as_list(), "resolution": [nx, ny], "r": raster.r, "runs": runs}


def raster_from_json(obj):
    nx, ny = obj["resolution"]
    flat = np.zeros(nx * ny, dtype=bool)
    pos = 0
    val = False
    for run in obj["runs"]:
        flat[pos : pos + run] = val
        pos += run
        val = not val
    return AmoebaRaster(Window(*obj["window"]), flat.reshape(ny, nx), np.empty((0, 2)), np.empty((0, 2)), 0, obj.get("r", 1.0))
