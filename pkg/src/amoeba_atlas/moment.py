"""Moment maps, compactified amoebas and weighted compactified amoebas.

The moment map depends on a point only through its log-modulus, so all
clouds are computed from amoeba-space samples. Hadamard powers enter as
logits ``r * log|a_s| + <s, u>`` and are never exponentiated.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .amoeba import DEFAULT_PAD, DEFAULT_THETAS, Window, component_labels, default_window, sample_hypersurface
from .lattice import LatticePolytope
from .numerics import softmax_weights
from .tropical import TropicalPolynomial, tropical_curve_2d

AMBIENTS = ("log", "polytope")


@dataclass(frozen=True)
class PointCloud:
    """Points in R^n, sorted lexicographically; ``ambient`` is ``"log"``
    (amoeba space) or ``"polytope"`` (inside the Newton polytope)."""

    points: np.ndarray
    ambient: str

    def __post_init__(self):
        if self.ambient not in AMBIENTS:
            raise ValueError(f"unknown ambient {self.ambient!r}")
        P = np.asarray(self.points, dtype=float)
        if P.ndim != 2:
            P = P.reshape(len(P), -1)
        if len(P):
            P = P[np.lexsort(P.T[::-1])]
        P.setflags(write=False)
        object.__setattr__(self, "points", P)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return (
            isinstance(other, PointCloud)
            and self.ambient == other.ambient
            and self.points.shape == other.points.shape
            and bool(np.array_equal(self.points, other.points))
        )

    def thin(self, spacing):
        """Keep one point per grid box of side ``spacing``."""
        if not len(self):
            return self
        keys = np.floor(self.points / spacing).astype(np.int64)
        keys -= keys.min(axis=0)
        flat = np.ravel_multi_index(keys.T, tuple(keys.max(axis=0) + 1))
        _, first = np.unique(flat, return_index=True)
        return PointCloud(self.points[np.sort(first)], self.ambient)

    def to_json(self, digits=12):
        """``digits=None`` keeps full precision."""
        P = self.points if digits is None else np.round(self.points, digits)
        return {"ambient": self.ambient, "points": P.tolist()}

    @classmethod
    def from_json(cls, obj):
        pts = np.asarray(obj["points"], dtype=float)
        return cls(pts.reshape(len(pts), -1) if len(pts) else np.empty((0, 2)), obj["ambient"])


def moment_map_log(exponents, U, log_weights=None):
    """``sum_s s w_s`` with ``w = softmax(log_weights + <s, u>)`` for each
    row ``u`` of ``U``."""
    E = np.asarray(exponents, dtype=float)
    U = np.asarray(U, dtype=float)
    logits = U @ E.T if U.ndim == 2 else E @ U
    if log_weights is not None:
        logits = logits + np.asarray(log_weights, dtype=float)
    return softmax_weights(logits) @ E


def _log_abs(x):
    x = np.asarray(x, dtype=complex)
    if np.any(x == 0):
        raise ValueError("moment maps need points with all coordinates nonzero")
    return np.log(np.abs(x))


def moment_map(support, x):
    """Moment map of the support set at ``x`` (one point or a stack)."""
    return moment_map_log(support, _log_abs(x))


def weighted_moment_map(f, x, r=1.0):
    """Moment map weighted by ``|a_s|**r``."""
    return moment_map_log(f.support, _log_abs(x), r * f.log_moduli())


@dataclass(frozen=True)
class Sampling:
    """Hypersurface sampling parameters.

    ``window=None`` picks the default window of the Hadamard power. With
    ``local_radius > 0`` extra fibers with spacing ``local_step`` are placed
    within that log distance of each tropical vertex, which is where the
    moment image of a large Hadamard power fills out its cells.
    """

    window: Window | None = None
    thetas: int = DEFAULT_THETAS
    slices: int = 400
    local_radius: float = 8.0
    local_step: float = 0.1

    def __post_init__(self):
        if self.thetas < 1 or self.slices < 2:
            raise ValueError("thetas and slices must be positive")


def _local_slices(f, r, radius, step):
    if radius <= 0:
        return None
    curve = tropical_curve_2d(TropicalPolynomial.from_polynomial(f, r))
    if curve.is_empty():
        return None
    offsets = np.arange(-radius, radius + step / 2, step)
    V = np.asarray(curve.vertices)
    # snapping to multiples of the step merges overlapping neighbourhoods
    return tuple(
        np.unique(np.round((V[:, k][:, None] + offsets[None, :]).ravel() / step)) * step for k in (0, 1)
    )


def _hypersurface_log_points(f, r, sampling):
    # tentacles must reach far enough for their images to approach the
    # boundary of the polygon
    window = sampling.window or default_window(f, r, pad=max(DEFAULT_PAD, sampling.local_radius))
    extra = _local_slices(f, r, sampling.local_radius, sampling.local_step)
    sample = sample_hypersurface(f, window, sampling.thetas, sampling.slices, r, extra)
    return sample.log_abs


def compactified_amoeba(f, sampling=Sampling()):
    U = _hypersurface_log_points(f, 1.0, sampling)
    return PointCloud(moment_map_log(f.support, U), "polytope")


def wca(f, r=1.0, sampling=Sampling()):
    """Weighted compactified amoeba of the Hadamard power ``f^[r]``."""
    if not r >= 1:
        raise ValueError("the Hadamard exponent of a weighted compactified amoeba must be at least 1")
    U = _hypersurface_log_points(f, r, sampling)
    return PointCloud(moment_map_log(f.support, U, r * f.log_moduli()), "polytope")


def moment_jacobian_det(exponents, U, log_weights=None):
    """Determinant of the derivative of ``u -> moment_map_log(u)``.

    The derivative of a softmax-weighted mean is the weighted covariance of
    the exponents, so this is ``det Cov_w(s)`` at every row of ``U``.
    """
    E = np.asarray(exponents, dtype=float)
    U = np.atleast_2d(np.asarray(U, dtype=float))
    logits = U @ E.T
    if log_weights is not None:
        logits = logits + np.asarray(log_weights, dtype=float)
    W = softmax_weights(logits)
    mean = W @ E
    C = np.einsum("bk,ki,kj->bij", W, E, E) - mean[:, :, None] * mean[:, None, :]
    return np.linalg.det(C)


def complement_areas(f, raster, components, log_weights=None):
    """Area of the moment image of each raster complement component.

    The moment map is a diffeomorphism from the amoeba complement onto the
    complement of the compactified amoeba, so each image area is the
    integral of the Jacobian determinant over the component. Pass
    ``log_weights`` for the weighted moment map. Mass outside the raster
    window is not counted.
    """
    labels = component_labels(raster)
    hx, hy = raster.cell_size
    xs = raster.cell_centers(0)
    ys = raster.cell_centers(1)
    X, Y = np.meshgrid(xs, ys)
    det = moment_jacobian_det(f.support, np.column_stack([X.ravel(), Y.ravel()]), log_weights)
    det = det.reshape(labels.shape)
    return [float(det[labels == c.label].sum() * hx * hy) for c in components]


def polytope_area(f):
    return LatticePolytope.from_points(f.support).doubled_area() / 2.0
