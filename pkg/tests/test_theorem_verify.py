from fractions import Fraction

import pytest

from nodal_atlas.eigenfamilies import product_mode, rectangle_mode, sphere_harmonic, torus_eigenfunction
from nodal_atlas.nodal_extract import GridSpec
from nodal_atlas.theorem_verify import (
    HypothesisNotMet,
    Verdict,
    analyze,
    check_domain,
    check_main1,
    verdicts_csv,
)

GRID = GridSpec(256)
_cache = {}


def report(u):
    key = repr(u.to_json())
    if key not in _cache:
        _cache[key] = analyze(u, GRID)
    return _cache[key]


def lr(rep, theorem):
    v = rep.verdict(theorem)
    return (v.lhs, v.rhs) if v else None


def test_verdict_arithmetic_is_exact():
    v = Verdict("x", Fraction(7, 2), Fraction(4), True)
    assert v.holds and not v.equality and v.consistent is False and v.slack == Fraction(1, 2)
    assert v.to_row()["lhs"] == "7/2"


def test_product_mode_equalities():
    rep = report(product_mode(2, 1))
    assert lr(rep, "critical_count") == (8, 8)
    assert lr(rep, "order_sum") == (16, 16)
    assert lr(rep, "cellular_count") == (8, 8)
    assert lr(rep, "cellular_order_sum") == (16, 16)
    # k = 14 for lambda = 5
    assert lr(rep, "courant") == (8, 14)
    assert lr(rep, "index_count") == (8, 14)
    assert all(v.holds for v in rep.verdicts)
    assert all(v.consistent is not False for v in rep.verdicts)


def test_sphere_y42_equality():
    rep = report(sphere_harmonic(4, 2))
    # mu = 2*2*3 = 12, |C| = 2*2*2 + 2 = 10, all orders 2
    assert rep.mu == 12
    assert lr(rep, "critical_count") == (10, 10)
    assert lr(rep, "cellular_order_sum") == (20, 20)


def test_sphere_y53_strict_and_order_sum_equality():
    rep = report(sphere_harmonic(5, 3))
    assert lr(rep, "critical_count") == (14, 16)
    v = rep.verdict("critical_count")
    assert v.holds and not v.equality and v.equality_predicted is False
    # 12 crossings of order 2 and two poles of order 3
    assert lr(rep, "order_sum") == (30, 30)


def test_sphere_y31_index_bound():
    rep = report(sphere_harmonic(3, 1))
    assert rep.index == 10
    assert lr(rep, "index_count") == (4, 8)
    assert lr(rep, "critical_count_refined") == (4, 4)


def test_rectangle_21_all_bounds():
    rep = report(rectangle_mode(2, 1))
    assert lr(rep, "critical_count_refined") == (1, 1)
    assert lr(rep, "order_sum") == (2, 2)
    assert lr(rep, "contour_count") == (0, 0)
    assert lr(rep, "domain_count") == (1, 1)
    assert lr(rep, "domain_order_sum") == (2, 2)


def test_rectangle_22_contour_bounds():
    rep = report(rectangle_mode(2, 2))
    assert lr(rep, "contour_count") == (1, 2)
    assert lr(rep, "contour_order_sum") == (2, 4)


@pytest.mark.parametrize("j,k", [(1, 1), (2, 3), (3, 3), (4, 2)])
def test_domain_bound_is_sharp_on_sine_products(j, k):
    rep = report(rectangle_mode(j, k))
    assert lr(rep, "domain_count") == (j * k - 1, j * k - 1)


def test_domain_interior_corollary():
    rep = report(rectangle_mode(3, 1))
    assert lr(rep, "domain_interior_count") == (0, 1)


def test_gating_without_critical_points():
    rep = report(torus_eigenfunction([((1, 0), 0.5), ((-1, 0), 0.5)]))
    assert rep.verdict("critical_count") is None and rep.verdict("cellular_count") is None
    assert rep.verdict("courant") is not None
    with pytest.raises(HypothesisNotMet):
        check_main1(rep)
    with pytest.raises(HypothesisNotMet):
        check_domain(rep)
    first = report(rectangle_mode(1, 1))
    assert first.verdict("index_count") is None
    assert first.verdict("domain_interior_count") is None and first.verdict("contour_count") is None


def test_refined_lhs_dominates():
    for u in (rectangle_mode(3, 2), sphere_harmonic(4, 1), product_mode(1, 3)):
        rep = report(u)
        assert rep.verdict("critical_count_refined").lhs >= rep.verdict("critical_count").lhs


def test_csv_layout():
    rep = report(rectangle_mode(2, 1))
    text = verdicts_csv(rep.verdicts, {"label": "r"})
    lines = text.splitlines()
    assert lines[0].startswith("# nodal-atlas-verdicts/")
    assert lines[1] == "label,theorem,lhs,rhs,holds,equality,predicted,consistent"
    assert lines[2].startswith("r,critical_count,1,1,True,True,True,True")
