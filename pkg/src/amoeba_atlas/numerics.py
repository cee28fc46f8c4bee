"""Numerical kernels: polynomial roots, stable softmax, Hausdorff distance,
and the lopsidedness margin ascent.

Polynomial coefficient arrays are always in ascending order, ``c[0] + c[1] t
+ ... + c[d] t**d``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import logsumexp, softmax

ROOT_TOL = 1e-12
ROOT_MAXITER = 200
# Gap (in log-modulus units) between tropical root clusters above which the
# clusters are solved separately. Truncation error is about exp(-gap).
CLUSTER_GAP = 15.0


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    residual_bound: float
    converged: bool
    iterations: int

    def __len__(self):
        return len(self.roots)


def _newton_polygon_log_radii(logmod):
    """Log-radii of the roots predicted by the upper Newton polygon.

    ``logmod`` has shape (B, m) with ``-inf`` for zero coefficients. Returns
    an array of shape (B, m - 1): entry k is the log-radius attached to the
    unit interval [k, k+1], NaN outside the span of nonzero coefficients.
    Also returns the index of the hull vertex starting each interval's
    segment and the segment length, which are used to spread initial angles.
    """
    L = np.asarray(logmod, dtype=float)
    B, m = L.shape
    finite = np.isfinite(L)
    idx = np.arange(m)
    vert = finite.copy()
    for i in range(m):
        for j in range(i + 2, m):
            ok = finite[:, i] & finite[:, j]
            if not ok.any():
                continue
            slope = (L[:, j] - L[:, i]) / (j - i)
            for k in range(i + 1, j):
                chord = L[:, i] + slope * (k - i)
                below = ok & finite[:, k] & (L[:, k] < chord - 1e-12)
                vert[:, k] &= ~below
    prev = np.where(vert, idx, -1)
    prev = np.maximum.accumulate(prev, axis=1)
    nxt = np.where(vert, idx, m)
    nxt = np.minimum.accumulate(nxt[:, ::-1], axis=1)[:, ::-1]
    p = prev[:, :-1]
    n = nxt[:, 1:]
    valid = (p >= 0) & (n < m)
    pc = np.clip(p, 0, m - 1)
    nc = np.clip(n, 0, m - 1)
    rows = np.arange(B)[:, None]
    with np.errstate(invalid="ignore"):
        slope = (L[rows, nc] - L[rows, pc]) / np.where(valid, nc - pc, 1)
    logr = np.where(valid, -slope, np.nan)
    return logr, pc, np.where(valid, nc - pc, 1)


def _horner(coeffs, z):
    """Evaluate p and p' at every z[b, i]; coeffs has shape (B, d+1)."""
    d = coeffs.shape[1] - 1
    p = np.broadcast_to(coeffs[:, d : d + 1], z.shape).astype(complex)
    dp = np.zeros_like(p)
    for k in range(d - 1, -1, -1):
        dp = dp * z + p
        p = p * z + coeffs[:, k : k + 1]
    return p, dp


def aberth_batch(coeffs, tol=ROOT_TOL, maxiter=ROOT_MAXITER):
    """Ehrlich-Aberth iteration on a batch of same-degree polynomials.

    Every row must have nonzero leading and constant coefficients. Returns
    ``(roots, converged, iterations)`` with roots of shape (B, d).
    """
    c = np.asarray(coeffs, dtype=complex)
    B, m = c.shape
    d = m - 1
    if d < 1:
        raise ValueError("degree must be at least 1")
    if d == 1:
        return (-c[:, :1] / c[:, 1:2]), np.ones(B, dtype=bool), 1

    with np.errstate(divide="ignore"):
        logr, start, seglen = _newton_polygon_log_radii(np.log(np.abs(c)))
    k = np.arange(d)[None, :]
    ang = 2.0 * np.pi * (k - start) / seglen + 0.7 + 0.37 * start
    z = np.exp(logr + 1j * ang)

    converged = np.zeros(B, dtype=bool)
    active = np.arange(B)
    eye = np.eye(d, dtype=bool)
    it = 0
    for it in range(1, maxiter + 1):
        za = z[active]
        ca = c[active]
        p, dp = _horner(ca, za)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = p / dp
            w = np.where(np.isfinite(w), w, 1e-8 * (1 + np.abs(za)))
            diff = za[:, :, None] - za[:, None, :]
            diff[:, eye] = np.inf
            s = (1.0 / diff).sum(axis=2)
            corr = w / (1.0 - w * s)
        corr = np.where(np.isfinite(corr), corr, w)
        za = za - corr
        z[active] = za
        scale = np.maximum(np.abs(za), np.finfo(float).tiny)
        done = np.max(np.abs(corr) / scale, axis=1) <= tol
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break
    return z, converged, it


def roots(coeffs, tol=ROOT_TOL, maxiter=ROOT_MAXITER):
    """All complex roots of ``sum(coeffs[k] * t**k)`` by Aberth iteration.

    Leading coefficients below ``1e-14`` times the largest modulus are
    trimmed. Exact zero roots (vanishing low coefficients) are returned as
    0. Raises ``ValueError`` for the zero polynomial or degree 0.
    """
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    scale = np.abs(c).max() if c.size else 0.0
    if scale == 0.0:
        raise ValueError("zero polynomial has no finite root set")
    c = c / scale
    nz = np.nonzero(np.abs(c) > 1e-14)[0]
    c = c[: nz[-1] + 1]
    low = int(np.nonzero(c)[0][0])
    if len(c) - 1 < 1:
        raise ValueError("polynomial has degree 0")
    core = c[low:]
    if len(core) > 1:
        z, conv, it = aberth_batch(core[None, :], tol=tol, maxiter=maxiter)
        found = z[0]
        conv = bool(conv[0])
    else:
        found, conv, it = np.empty(0, dtype=complex), True, 0
    allr = np.concatenate([np.zeros(low, dtype=complex), found])
    d = len(c) - 1
    p = np.polynomial.polynomial.polyval(allr, c)
    resid = float(np.abs(p).max() / (np.abs(c).max() * (d + 1)))
    return RootSet(allr, resid, conv, it)


def fiber_roots(logmod, phase, cluster_gap=CLUSTER_GAP, tol=ROOT_TOL, maxiter=ROOT_MAXITER, polish=2):
    """Roots of many polynomials given in log-polar form, without overflow.

    Row b is ``sum_k exp(logmod[b, k] + 1j * phase[b, k]) t**k``; absent
    terms carry ``logmod = -inf``. Roots are grouped by the slopes of the
    upper Newton polygon; clusters separated by more than ``cluster_gap`` are
    solved independently after rescaling ``t`` to unit size, so coefficient
    spreads like ``30**256`` never leave double range. ``polish`` Newton
    steps on the full polynomial then remove the truncation error.

    Returns ``(log_abs, arg)`` of shape (B, m - 1). Entry k belongs to the
    Newton-polygon unit interval [k, k+1]; roots at zero have ``log_abs =
    -inf`` and roots lost to a vanishing leading coefficient are NaN.
    """
    L = np.asarray(logmod, dtype=float)
    P = np.asarray(phase, dtype=float)
    B, m = L.shape
    out_log = np.full((B, m - 1), np.nan)
    out_arg = np.zeros((B, m - 1))
    if m < 2 or B == 0:
        return out_log, out_arg

    finite = np.isfinite(L)
    lo = np.where(finite.any(axis=1), np.argmax(finite, axis=1), m)
    hi = np.where(finite.any(axis=1), m - 1 - np.argmax(finite[:, ::-1], axis=1), -1)
    kk = np.arange(m - 1)[None, :]
    out_log[kk < lo[:, None]] = -np.inf

    logr, _, _ = _newton_polygon_log_radii(L)
    inside = (kk >= lo[:, None]) & (kk < hi[:, None])
    # interval k starts a new cluster when it is the first interval or the
    # radius jumps by at least cluster_gap from interval k-1
    jump = np.zeros((B, m - 1), dtype=bool)
    if m > 2:
        with np.errstate(invalid="ignore"):
            jump[:, 1:] = np.abs(logr[:, 1:] - logr[:, :-1]) >= cluster_gap
    first = inside & ((kk == lo[:, None]) | jump)
    rows, starts = np.nonzero(first)
    if rows.size == 0:
        return out_log, out_arg
    # clusters tile [lo, hi) contiguously; nonzero() is row-major sorted
    nxt = np.empty_like(starts)
    nxt[:-1] = starts[1:]
    same = np.zeros(rows.size, dtype=bool)
    same[:-1] = rows[1:] == rows[:-1]
    nxt = np.where(same, nxt, hi[rows])
    degs = nxt - starts

    for D in np.unique(degs):
        sel = np.nonzero(degs == D)[0]
        r = rows[sel]
        a = starts[sel]
        span = a[:, None] + np.arange(D)[None, :]
        center = logr[r[:, None], span].mean(axis=1)
        cidx = a[:, None] + np.arange(D + 1)[None, :]
        Ls = L[r[:, None], cidx] + center[:, None] * cidx
        Ls = Ls - Ls.max(axis=1, keepdims=True)
        coeffs = np.exp(Ls + 1j * P[r[:, None], cidx])
        coeffs[~np.isfinite(Ls)] = 0.0
        z, _, _ = aberth_batch(coeffs, tol=tol, maxiter=maxiter)
        with np.errstate(divide="ignore"):
            out_log[r[:, None], span] = np.log(np.abs(z)) + center[:, None]
        out_arg[r[:, None], span] = np.angle(z)
    for _ in range(polish):
        _newton_polish(L, P, out_log, out_arg)
    return out_log, out_arg


def _newton_polish(L, P, out_log, out_arg):
    """One Newton step on the full polynomial for every finite root, in
    log-polar form; a step is kept only where it lowers the residual."""
    ok = np.isfinite(out_log)
    if not ok.any():
        return
    b, k = np.nonzero(ok)
    lt, at = out_log[b, k], out_arg[b, k]
    deg = np.arange(L.shape[1])

    def residual(lt, at):
        # terms a_j t^j scaled by the largest one
        logs = L[b] + deg[None, :] * lt[:, None]
        M = np.max(np.where(np.isfinite(logs), logs, -np.inf), axis=1, keepdims=True)
        w = np.exp(logs - M + 1j * (P[b] + deg[None, :] * at[:, None]))
        w[~np.isfinite(logs)] = 0.0
        return w.sum(axis=1), (w * deg[None, :]).sum(axis=1)

    p, tdp = residual(lt, at)
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = p / tdp
    good = np.isfinite(delta) & (np.abs(delta) < 0.5)
    step = np.log1p(-np.where(good, delta, 0.0))
    lt2, at2 = lt + step.real, at + step.imag
    p2, _ = residual(lt2, at2)
    keep = good & (np.abs(p2) < np.abs(p))
    out_log[b[keep], k[keep]] = lt2[keep]
    out_arg[b[keep], k[keep]] = np.angle(np.exp(1j * at2[keep]))


def softmax_weights(logits):
    """Normalized weights ``exp(l_i) / sum_j exp(l_j)`` without overflow."""
    lam = np.asarray(logits, dtype=float)
    if lam.size == 0:
        raise ValueError("softmax of an empty vector")
    return softmax(lam, axis=-1)


def hausdorff_distance(A, B):
    """Symmetric Euclidean Hausdorff distance between finite point sets."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.size == 0 or B.size == 0:
        raise ValueError("Hausdorff distance needs two nonempty point sets")
    dab = cKDTree(B).query(A)[0].max()
    dba = cKDTree(A).query(B)[0].max()
    return float(max(dab, dba))


# --- lopsidedness margin -------------------------------------------------


def margin_function(exponents, heights, alpha_index):
    """Return ``g`` and its gradient for the dominance margin of one term.

    ``g(u) = h_a + <a, u> - logsumexp_{b != a}(h_b + <b, u>)`` is concave;
    ``g(u) > 0`` means the term at ``alpha_index`` is lopsided at ``u``.
    """
    E = np.asarray(exponents, dtype=float)
    h = np.asarray(heights, dtype=float)
    mask = np.ones(len(E), dtype=bool)
    mask[alpha_index] = False
    Eo, ho = E[mask], h[mask]
    a, ha = E[alpha_index], h[alpha_index]

    def g(u):
        u = np.asarray(u, dtype=float)
        return ha + u @ a - logsumexp(ho + Eo @ u)

    def grad(u):
        u = np.asarray(u, dtype=float)
        w = softmax(ho + Eo @ u)
        return a - w @ Eo

    return g, grad


@dataclass(frozen=True)
class MarginResult:
    u: np.ndarray
    margin: float
    status: str  # "converged" | "unbounded" | "max_iter" | "absent"
    iterations: int

    @property
    def certified(self):
        return self.status == "unbounded" or self.margin > 0


def maximize_margin(f, alpha, start=None, maxiter=500, unbounded_norm=1e3, gtol=1e-10):
    """Gradient ascent with Armijo backtracking on the margin of ``alpha``.

    A positive margin at the returned point certifies that the point lies in
    a complement component of order ``alpha``. Exponents outside the support
    have no term to dominate and give status ``"absent"``.
    """
    alpha = tuple(int(v) for v in alpha)
    exps = [e for e, _ in f.terms]
    if alpha not in exps:
        u0 = np.zeros(f.n) if start is None else np.asarray(start, dtype=float)
        return MarginResult(u0, -np.inf, "absent", 0)
    if len(exps) < 2:
        raise ValueError("margin needs at least two terms")
    g, grad = margin_function(exps, f.log_moduli(), exps.index(alpha))
    u = np.zeros(f.n) if start is None else np.array(start, dtype=float)
    gu = g(u)
    step = 1.0
    status = "max_iter"
    it = 0
    for it in range(1, maxiter + 1):
        d = grad(u)
        gn2 = float(d @ d)
        if gn2 < gtol**2:
            status = "converged"
            break
        step *= 2.0
        while True:
            cand = u + step * d
            gc = g(cand)
            if gc >= gu + 1e-4 * step * gn2:
                break
            step *= 0.5
            if step < 1e-16:
                break
        if step < 1e-16:
            status = "converged"
            break
        u, gu = cand, gc
        if np.linalg.norm(u) > unbounded_norm:
            status = "unbounded"
            break
    return MarginResult(u, float(gu), status, it)
