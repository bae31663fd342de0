import math

import numpy as np
import pytest

from nodal_atlas.eigenfamilies import product_mode, rectangle_mode, sphere_harmonic, torus_eigenfunction
from nodal_atlas.lattice import construct_high_vanishing
from nodal_atlas.nodal_extract import (
    GridSpec,
    detect_critical_points,
    extract_nodal_graph,
    local_degree,
    vanishing_order,
)
from nodal_atlas.nodal_graph import VertexClass, check_handshake, components, euler_slack, suppress_corners

COARSE = GridSpec(resolution=256)


def _graph(u, grid=COARSE):
    return suppress_corners(extract_nodal_graph(u, grid=grid))


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(resolution=8)
    with pytest.raises(ValueError):
        GridSpec(eps_val=0.0)


def test_product_mode_graph_and_critical_positions():
    u = product_mode(2, 1)
    g = _graph(u)
    assert (g.V, g.E, g.F) == (8, 16, 8)
    assert components(g) == (1, 0)
    # zero lines x = +-pi/4, +-3pi/4 and y = +-pi/2 cross at 8 points
    expected = sorted((sx * a, sy * math.pi / 2) for a in (math.pi / 4, 3 * math.pi / 4) for sx in (1, -1)
                      for sy in (1, -1))
    got = sorted(v.pos for v in g.vertices)
    np.testing.assert_allclose(got, expected, atol=1e-9)
    assert all(v.degree == 4 and v.order == 2 for v in g.vertices)


def test_two_circles_on_the_torus():
    u = torus_eigenfunction([((1, 0), 0.5), ((-1, 0), 0.5)])
    g = _graph(u)
    assert (g.V, g.E, g.F) == (2, 2, 2)
    assert components(g) == (2, 2)
    assert euler_slack(g) == 1
    assert not g.cellular


def test_sphere_y31_crossings():
    g = _graph(sphere_harmonic(3, 1))
    assert (g.V, g.E, g.F) == (4, 8, 6)
    # cos(phi) = 0 meets the latitudes 5 cos^2(theta) = 1
    t = math.acos(1 / math.sqrt(5))
    expected = sorted((p, th) for p in (-math.pi / 2, math.pi / 2) for th in (t, math.pi - t))
    np.testing.assert_allclose(sorted(v.pos for v in g.vertices), expected, atol=1e-9)


def test_zonal_harmonic_is_three_latitude_circles():
    g = _graph(sphere_harmonic(3, 0))
    assert (g.V, g.E, g.F) == (3, 3, 4) and components(g) == (3, 3)
    # roots of P_3: cos(theta) in {0, +-sqrt(3/5)}
    thetas = sorted(v.pos[1] for v in g.vertices)
    ring = sorted(math.acos(c) for c in (math.sqrt(0.6), 0.0, -math.sqrt(0.6)))
    # dummy vertices sit on the traced polyline, within one cell of the exact circle
    np.testing.assert_allclose(thetas, ring, atol=math.pi / 256)


def test_constant_harmonic_has_empty_nodal_set():
    g = _graph(sphere_harmonic(0, 0))
    assert (g.V, g.E, g.F) == (0, 0, 1)


def test_poles_of_higher_order():
    g = _graph(sphere_harmonic(5, 3))
    poles = [v for v in g.vertices if v.pos[1] in (0.0, math.pi)]
    assert len(poles) == 2 and all(v.degree == 6 and v.order == 3 for v in poles)
    assert len(g.critical_vertices()) == 2 * 3 * 2 + 2


def test_order_one_pole_is_not_a_vertex():
    g = _graph(sphere_harmonic(2, 1))
    assert all(v.pos[1] not in (0.0, math.pi) for v in g.vertices)
    assert g.F == 2 * 1 * 2


def test_rectangle_boundary_critical_points():
    g = _graph(rectangle_mode(2, 1))
    assert (g.V, g.E, g.F) == (2, 3, 2)
    np.testing.assert_allclose(sorted(v.pos for v in g.vertices), [(math.pi / 2, 0.0), (math.pi / 2, math.pi)],
                               atol=1e-12)
    assert all(v.cls is VertexClass.BOUNDARY and v.degree == 3 and v.order == 2 for v in g.vertices)


def test_corners_are_kept_before_suppression():
    g = extract_nodal_graph(rectangle_mode(2, 1), grid=COARSE)
    assert sum(v.cls is VertexClass.CORNER for v in g.vertices) == 4
    assert (g.V, g.E) == (6, 7)


def test_first_rectangle_mode_is_a_single_boundary_circle():
    g = _graph(rectangle_mode(1, 1))
    assert (g.V, g.E, g.F) == (1, 1, 1) and components(g) == (1, 1)


@pytest.mark.parametrize("j,k", [(3, 2), (1, 4)])
def test_non_square_rectangle(j, k):
    g = _graph(rectangle_mode(j, k, a=2.0, b=1.0))
    interior = [v for v in g.vertices if v.cls is VertexClass.INTERIOR]
    boundary = [v for v in g.vertices if v.cls is VertexClass.BOUNDARY]
    assert len(interior) == (j - 1) * (k - 1) and len(boundary) == 2 * (j - 1) + 2 * (k - 1)
    assert g.F == j * k


def test_high_vanishing_point_at_origin():
    u, cert = construct_high_vanishing(3)
    g = _graph(u)
    origin = [v for v in g.vertices if max(abs(v.pos[0]), abs(v.pos[1])) < 1e-6]
    assert len(origin) == 1
    assert origin[0].degree == 2 * cert.attained_order == 8
    assert vanishing_order(u, (0.0, 0.0)) == cert.attained_order


def test_vanishing_order_rejects_points_off_the_nodal_set():
    with pytest.raises(ValueError):
        vanishing_order(product_mode(1, 1), (0.0, 0.0))
    assert vanishing_order(product_mode(1, 1), (math.pi / 2, 0.0)) == 1


def test_local_degree_counts_arcs():
    u = product_mode(1, 1)
    assert local_degree(u, (math.pi / 2, math.pi / 2), 0.05) == 4
    assert local_degree(u, (math.pi / 2, 0.0), 0.05) == 2


@pytest.mark.parametrize("u", [product_mode(3, 2), sphere_harmonic(4, 2), sphere_harmonic(4, 0),
                               rectangle_mode(3, 3), torus_eigenfunction([((1, 0), 0.5), ((-1, 0), 0.5)])],
                         ids=["torus32", "Y42", "Y40", "rect33", "cosx"])
def test_face_euler_characteristics_account_for_the_slack(u):
    g = _graph(u)
    check_handshake(g)
    # chi(M) = chi(graph) + sum of face Euler characteristics
    assert g.V - g.E + g.F - g.surface.chi == sum(1 - f.euler_char for f in g.faces)
    assert euler_slack(g) >= 0


def test_degree_order_relation_at_detected_points():
    for u in (sphere_harmonic(6, 4), rectangle_mode(4, 3), product_mode(4, 1)):
        for cp in detect_critical_points(u, grid=COARSE):
            if cp.location_class is VertexClass.BOUNDARY:
                assert cp.degree == cp.vanishing_order + 1
            else:
                assert cp.degree == 2 * cp.vanishing_order


def test_extraction_is_deterministic():
    u = sphere_harmonic(4, 3)
    assert _graph(u).to_json() == _graph(u).to_json()


def test_counts_stable_under_grid_doubling():
    for u in (product_mode(2, 3), sphere_harmonic(5, 2), rectangle_mode(3, 4)):
        assert _graph(u, GridSpec(128)).counts() == _graph(u, GridSpec(256)).counts()
