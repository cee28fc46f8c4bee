import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amoeba_atlas.amoeba import Window, amoeba_points, complement_components
from amoeba_atlas.lattice import LatticePolytope
from amoeba_atlas.moment import (
    PointCloud,
    Sampling,
    compactified_amoeba,
    complement_areas,
    moment_jacobian_det,
    moment_map,
    moment_map_log,
    polytope_area,
    wca,
    weighted_moment_map,
)
from amoeba_atlas.numerics import hausdorff_distance, softmax_weights
from amoeba_atlas.poly import parse_polynomial
from amoeba_atlas.polyhedral import complement_analysis

GOLDEN = Path(__file__).parent / "golden"
QUICK = Sampling(thetas=64, slices=120, local_radius=0.0)

coords = st.floats(-50, 50)


def test_single_monomial_maps_to_itself():
    assert moment_map([(2, 3)], [1.5 + 2j, -0.1j]) == pytest.approx([2, 3])


def test_equal_weights_give_barycentre():
    assert moment_map([(0, 0), (1, 0), (0, 1)], [1, 1]) == pytest.approx([1 / 3, 1 / 3])


def test_huge_modulus_does_not_overflow():
    m = moment_map_log([(0,), (1,)], np.array([1000.0]))
    assert np.all(np.isfinite(m)) and 1 - m[0] < 1e-300


def test_weighted_example():
    f = parse_polynomial("1 + x + 2*y")
    assert weighted_moment_map(f, [1, 1]) == pytest.approx([0.25, 0.5])


def test_weighted_reduces_to_plain_for_unit_moduli():
    f = parse_polynomial("1 + (0,1)*x - y + x*y")
    x = [0.3 - 2j, 4 + 1j]
    assert np.array_equal(weighted_moment_map(f, x), moment_map(f.support, x))


def test_moment_maps_need_nonzero_points():
    with pytest.raises(ValueError):
        moment_map([(0, 0), (1, 0)], [0, 1])


@settings(max_examples=100, deadline=None)
@given(coords, coords, st.floats(0, 6.3), st.floats(0, 6.3))
def test_depends_only_on_moduli(u, v, a, b):
    f = parse_polynomial("x + 30*x*y + 20*x^2*y + x^3*y + y^2")
    x = np.exp([u, v])
    y = x * np.exp(1j * np.array([a, b]))
    assert weighted_moment_map(f, x) == pytest.approx(weighted_moment_map(f, y), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(coords, coords, st.floats(-30, 30))
def test_constant_scaling_invariance(u, v, logc):
    f = parse_polynomial("1 + 3*x + 3*y + x^2*y + 4*x^3*y + x*y^2 + 10*x^2*y^2 + 4*x*y^3")
    g = f.scale(np.exp(logc))
    x = np.exp([u, v])
    assert weighted_moment_map(g, x) == pytest.approx(weighted_moment_map(f, x), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(coords, coords, st.floats(1, 300))
def test_images_lie_in_newton_polygon(u, v, r):
    f = parse_polynomial("x + x^2 + y + x*y^3 + x^4*y^2 + 3*x^3*y + 10*x*y")
    N = LatticePolytope.from_points(f.support)
    m = moment_map_log(f.support, np.array([[u, v]]), r * f.log_moduli())
    assert N.contains(m, tol=1e-9)[0]


def test_large_power_weights_approach_indicator():
    f = parse_polynomial("x + 30*x*y + 20*x^2*y + x^3*y + y^2")
    u = np.zeros(2)
    logits = 50 * f.log_moduli() + np.asarray(f.support) @ u
    w = softmax_weights(logits)
    top = int(np.argmax(logits))
    gap = np.sort(logits)[-1] - np.sort(logits)[-2]
    assert f.support[top] == (1, 1)
    assert 1 - w[top] <= len(w) * np.exp(-gap)


def test_jacobian_matches_finite_differences():
    f = parse_polynomial("x + 30*x*y + 20*x^2*y + x^3*y + y^2")
    u = np.array([0.3, -0.4])
    h = 1e-6
    J = np.column_stack(
        [(moment_map_log(f.support, u + h * e, f.log_moduli()) - moment_map_log(f.support, u - h * e, f.log_moduli())) / (2 * h) for e in np.eye(2)]
    )
    det = moment_jacobian_det(f.support, u[None, :], f.log_moduli())[0]
    assert det == pytest.approx(np.linalg.det(J), rel=1e-6)


def test_cloud_thin_and_json_round_trip():
    rng = np.random.default_rng(0)
    cloud = PointCloud(rng.uniform(size=(500, 2)), "polytope")
    thin = cloud.thin(0.1)
    assert len(thin) <= 100
    assert hausdorff_distance(thin.points, cloud.points) <= 0.1 * np.sqrt(2)
    assert PointCloud.from_json(json.loads(json.dumps(cloud.to_json(digits=None)))) == cloud
    rounded = PointCloud.from_json(json.loads(json.dumps(cloud.to_json())))
    assert np.max(np.abs(rounded.points - cloud.points)) <= 5e-13


def test_cloud_is_sorted_and_frozen():
    cloud = PointCloud([[1, 0], [0, 1], [0, 0]], "log")
    assert cloud.points.tolist() == [[0, 0], [0, 1], [1, 0]]
    with pytest.raises(ValueError):
        cloud.points[0, 0] = 3
    with pytest.raises(ValueError):
        PointCloud([[0, 0]], "elsewhere")


def test_compactified_line_stays_in_triangle_and_omits_vertices():
    f = parse_polynomial("1 + x + y")
    cloud = compactified_amoeba(f, Sampling(thetas=64, slices=200))
    N = LatticePolytope.from_points(f.support)
    assert N.contains(cloud.points, tol=1e-9).all()
    analysis = complement_analysis(cloud, f, resolution=200)
    assert analysis.orders == [(0, 0), (0, 1), (1, 0)]


def test_wca_at_one_is_weighted_compactified_amoeba():
    f = parse_polynomial("x + y + x^2*y^2 + 2*x*y")
    a = wca(f, 1, QUICK)
    U = np.vstack([a.points])  # already polytope space; recompute independently below
    from amoeba_atlas.amoeba import sample_hypersurface, default_window

    S = sample_hypersurface(f, default_window(f, 1.0, 3.0), 64, 120)
    b = PointCloud(np.array([weighted_moment_map(f, np.exp(u)) for u in S.log_abs]), "polytope")
    assert len(U) == len(b)
    assert hausdorff_distance(a.points, b.points) < 1e-12


def test_unit_moduli_weights_do_not_depend_on_power():
    f = parse_polynomial("1 + x + y + x*y")
    U = np.random.default_rng(2).normal(size=(50, 2))
    base = moment_map_log(f.support, U, 1 * f.log_moduli())
    assert np.array_equal(base, moment_map_log(f.support, U, 7 * f.log_moduli()))


def test_wca_rejects_small_power():
    with pytest.raises(ValueError):
        wca(parse_polynomial("1 + x + y"), 0.5)


def test_wca_large_power_stays_finite():
    f = parse_polynomial("x + 30*x*y + 20*x^2*y + x^3*y + y^2")
    cloud = wca(f, 256, QUICK)
    assert len(cloud) and np.isfinite(cloud.points).all()
    assert LatticePolytope.from_points(f.support).contains(cloud.points, tol=1e-9).all()


def test_vertex_components_are_small_in_compactified_amoeba():
    f = parse_polynomial("x + 30*x*y + 20*x^2*y + x^3*y + y^2")
    raster = amoeba_points(f, Window(-12, 12, -12, 12), (600, 600))
    comps = complement_components(raster, f=f)
    areas = dict(zip([c.order for c in comps], complement_areas(f, raster, comps)))
    total = polytope_area(f)
    N = LatticePolytope.from_points(f.support)
    for v in N.vertices:
        assert areas[v] / total < 0.02


@pytest.mark.parametrize("r", [1, 2, 3])
def test_weighted_stages_match_golden(r):
    # regression against stored clouds of the first three Hadamard powers
    f = parse_polynomial("x + x^2 + y + x*y^3 + x^4*y^2 + 3*x^3*y + 10*x*y + 10*x^2*y + 10*x*y^2 + 15*x^2*y^2 + 10*x^3*y^2")
    golden = PointCloud.from_json(json.loads((GOLDEN / f"wca_eleven_r{r}.json").read_text()))
    diam = LatticePolytope.from_points(f.support).diameter()
    cloud = wca(f, r).thin(0.005 * diam)
    assert hausdorff_distance(cloud.points, golden.points) <= 0.01 * diam


