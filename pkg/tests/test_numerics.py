import itertools

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amoeba_atlas.numerics import (
    fiber_roots,
    hausdorff_distance,
    margin_function,
    maximize_margin,
    roots,
    softmax_weights,
)
from amoeba_atlas.poly import parse_polynomial


def elementary_symmetric(z):
    e = np.zeros(len(z) + 1, dtype=complex)
    e[0] = 1
    for x in z:
        e[1:] = e[1:] - x * e[:-1]  # coefficients of prod (t - x), descending
    return e


def vieta_error(coeffs, z):
    c = np.asarray(coeffs, dtype=complex)
    expected = c[::-1] / c[-1]
    got = elementary_symmetric(z)
    scale = np.maximum(np.abs(expected), 1.0)
    return float(np.max(np.abs(got - expected) / scale))


@pytest.mark.parametrize("seed", range(20))
def test_roots_satisfy_vieta(seed):
    rng = np.random.default_rng(seed)
    d = rng.integers(2, 12)
    c = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
    rs = roots(c)
    assert rs.converged and len(rs) == d
    assert vieta_error(c, rs.roots) <= 1e-6


def test_roots_with_zero_roots_and_trimmed_leading_term():
    rs = roots([0, 0, 2, 1, 1e-20])
    assert len(rs) == 3
    assert np.sum(rs.roots == 0) == 2
    assert np.sort_complex(rs.roots[rs.roots != 0])[0] == pytest.approx(-2)


def test_roots_rejects_constants():
    with pytest.raises(ValueError):
        roots([3.0])
    with pytest.raises(ValueError):
        roots([0.0, 0.0])


def test_roots_match_numpy_on_multiple_root():
    rs = roots(np.poly([1, 1, -2])[::-1])
    assert sorted(np.round(rs.roots.real, 4)) == [-2, 1, 1]


def _mp_log_roots(logmod, phase):
    mpmath.mp.dps = 400
    coeffs = [mpmath.exp(mpmath.mpf(l)) * mpmath.expj(p) for l, p in zip(logmod, phase)]
    rs = mpmath.polyroots(coeffs[::-1], maxsteps=400, extraprec=2000)
    return sorted(float(mpmath.log(abs(z))) for z in rs)


@pytest.mark.parametrize("r", [1, 16, 256])
def test_fiber_roots_far_beyond_double_range(r):
    # coefficients 30**r x ... span thousands of orders of magnitude
    base = np.log([1.0, 30.0, 20.0, 1.0])
    L = r * base
    P = np.array([0.3, 1.1, -0.7, 2.0])
    la, _ = fiber_roots(L[None, :], P[None, :])
    assert np.all(np.isfinite(la))
    assert sorted(la[0]) == pytest.approx(_mp_log_roots(L, P), abs=1e-8)


def test_fiber_roots_marks_zero_and_missing_roots():
    L = np.array([[-np.inf, 0.0, 0.0, -np.inf]])
    la, _ = fiber_roots(L, np.zeros_like(L))
    assert la[0, 0] == -np.inf
    assert np.isnan(la[0, 2])
    assert la[0, 1] == pytest.approx(0.0)


def test_softmax_wide_spread():
    w = softmax_weights(np.array([0.0, 1000.0, -1000.0, 999.0]))
    assert np.all(np.isfinite(w))
    assert w.sum() == pytest.approx(1.0)
    assert w[1] / w[3] == pytest.approx(np.e)
    assert w[2] == 0.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=10))
def test_softmax_is_a_distribution(logits):
    w = softmax_weights(np.asarray(logits))
    assert np.all(w >= 0) and w.sum() == pytest.approx(1.0)


def test_hausdorff_against_brute_force():
    rng = np.random.default_rng(1)
    A, B = rng.normal(size=(40, 2)), rng.normal(size=(30, 2)) + 0.5
    D = np.linalg.norm(A[:, None] - B[None], axis=2)
    assert hausdorff_distance(A, B) == pytest.approx(max(D.min(axis=1).max(), D.min(axis=0).max()))
    assert hausdorff_distance(A, A) == 0.0
    with pytest.raises(ValueError):
        hausdorff_distance(A, np.empty((0, 2)))


MARGIN_POLY = parse_polynomial("x + 30*x*y + 20*x^2*y + x^3*y + y^2")


def _margin(alpha):
    exps = MARGIN_POLY.support
    return margin_function(exps, MARGIN_POLY.log_moduli(), exps.index(alpha))


@pytest.mark.parametrize("alpha", [(1, 1), (2, 1), (0, 2)])
def test_margin_gradient_matches_finite_differences(alpha):
    g, grad = _margin(alpha)
    rng = np.random.default_rng(7)
    h = 1e-6
    for u in rng.normal(scale=3, size=(50, 2)):
        fd = np.array([(g(u + h * e) - g(u - h * e)) / (2 * h) for e in np.eye(2)])
        assert np.max(np.abs(fd - grad(u))) <= 1e-6


def test_margin_is_concave():
    g, _ = _margin((1, 1))
    rng = np.random.default_rng(3)
    for _ in range(1000):
        u, v = rng.normal(scale=5, size=(2, 2))
        t = rng.uniform()
        assert g(t * u + (1 - t) * v) >= t * g(u) + (1 - t) * g(v) - 1e-9


def test_maximize_margin_certifies_lopsided_interior_term():
    res = maximize_margin(MARGIN_POLY, (1, 1))
    assert res.status == "converged" and res.certified and res.margin > 0


def test_maximize_margin_vertex_is_unbounded():
    res = maximize_margin(MARGIN_POLY, (0, 2))
    assert res.status == "unbounded" and res.certified


def test_maximize_margin_absent_term():
    res = maximize_margin(parse_polynomial("1 + x + y + x^2 + y^2"), (1, 1))
    assert res.status == "absent" and not res.certified


def test_maximize_margin_not_lopsided():
    res = maximize_margin(parse_polynomial("x + y + x^2*y^2 + x*y/2"), (1, 1))
    assert res.status == "converged" and not res.certified


def test_margin_maximizer_is_stationary():
    res = maximize_margin(MARGIN_POLY, (2, 1))
    _, grad = _margin((2, 1))
    assert np.linalg.norm(grad(res.u)) < 1e-6


@pytest.mark.parametrize("pair", list(itertools.combinations([0.1, 1.0, 10.0], 2)))
def test_roots_scale_covariance(pair):
    a, b = pair
    # roots of c(t/s) are s times the roots of c(t)
    c = np.array([1.0, -3.0, 2.0])
    s = b / a
    scaled = c / s ** np.arange(3)
    assert sorted(roots(scaled).roots.real) == pytest.approx(sorted(s * roots(c).roots.real))
