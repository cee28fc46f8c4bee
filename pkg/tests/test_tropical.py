import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amoeba_atlas.fixtures import CURVES
from amoeba_atlas.poly import LaurentPolynomial, parse_polynomial
from amoeba_atlas.tropical import (
    TropicalPolynomial,
    curve_to_json,
    tropical_curve_2d,
    tropical_eval,
    tropical_orders,
    vertex_bounding_box,
)


def test_line_curve():
    T = TropicalPolynomial.from_polynomial(parse_polynomial("1 + x + y"))
    C = tropical_curve_2d(T)
    assert C.vertices == ((0.0, 0.0),)
    assert sorted(d for _, d, _, _ in C.rays) == [(-1, 0), (0, -1), (1, 1)]
    assert C.balancing_defects() == [(0, 0)]


@pytest.mark.parametrize("name", sorted(CURVES))
def test_fixture_curves_are_balanced(name):
    C = tropical_curve_2d(TropicalPolynomial.from_polynomial(parse_polynomial(CURVES[name])))
    assert all(d == (0, 0) for d in C.balancing_defects())


@pytest.mark.parametrize("name", sorted(CURVES))
def test_vertices_are_ties_of_their_cells(name):
    T = TropicalPolynomial.from_polynomial(parse_polynomial(CURVES[name]))
    C = tropical_curve_2d(T)
    for v, cell in zip(C.vertices, C.cells):
        _, arg = tropical_eval(T, v, tol=1e-7)
        assert set(cell.vertices) <= arg


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=3, max_size=8, unique=True),
    st.data(),
)
def test_random_curves_are_balanced(exps, data):
    P = np.asarray(exps, dtype=float)
    if np.linalg.matrix_rank(P[1:] - P[0]) < 2:
        return
    coefs = data.draw(st.lists(st.floats(0.01, 100), min_size=len(exps), max_size=len(exps)))
    f = LaurentPolynomial.from_terms(list(zip(exps, coefs)), 2)
    C = tropical_curve_2d(TropicalPolynomial.from_polynomial(f))
    assert all(d == (0, 0) for d in C.balancing_defects())


def test_orders_of_small_interior_coefficient():
    f = parse_polynomial("x + y + x^2*y^2 + x*y/2")
    assert tropical_orders(TropicalPolynomial.from_polynomial(f)) == {(1, 0), (0, 1), (2, 2)}
    g = parse_polynomial("x + y + x^2*y^2 + 2*x*y")
    assert (1, 1) in tropical_orders(TropicalPolynomial.from_polynomial(g))


def test_hadamard_scales_vertices():
    f = parse_polynomial("x + y + x^2*y^2 + 2*x*y")
    a = np.asarray(vertex_bounding_box(f, 1.0))
    b = np.asarray(vertex_bounding_box(f, 4.0))
    assert b == pytest.approx(4 * a)


def test_curve_json_shape():
    obj = curve_to_json(tropical_curve_2d(TropicalPolynomial.from_polynomial(parse_polynomial("1 + x + y"))))
    assert len(obj["vertices"]) == 1 and len(obj["rays"]) == 3 and obj["edges"] == []
