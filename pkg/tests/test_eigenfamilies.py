import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from nodal_atlas.eigenfamilies import (
    DerivativeOrderError,
    associated_legendre,
    derivative_profile,
    eigenvalue_index,
    eval as eval_u,
    from_json,
    partial,
    product_mode,
    rectangle_mode,
    sphere_harmonic,
    torus_eigenfunction,
    torus_index,
)
from nodal_atlas.lattice import shell

H = 1e-4


@pytest.mark.parametrize("ell", range(0, 9))
def test_associated_legendre_matches_scipy_without_phase(ell):
    t = np.linspace(-0.999, 0.999, 41)
    for m in range(ell + 1):
        expected = (-1) ** m * scipy.special.lpmv(m, ell, t)
        np.testing.assert_allclose(associated_legendre(ell, m, t), expected, rtol=1e-10, atol=1e-10)


@settings(max_examples=40)
@given(st.integers(0, 8).flatmap(lambda l: st.tuples(st.just(l), st.integers(0, l))))
def test_legendre_has_ell_minus_m_interior_sign_changes(lm):
    ell, m = lm
    t = np.cos(np.linspace(1e-6, math.pi - 1e-6, 20001))
    p = associated_legendre(ell, m, t)
    assert np.count_nonzero(np.diff(np.sign(p)) != 0) == ell - m


def test_legendre_rejects_bad_indices():
    with pytest.raises(ValueError):
        associated_legendre(2, 3, 0.1)


def _laplacian_flat(u, x, y, h=1e-3):
    return (u.value(x + h, y) + u.value(x - h, y) + u.value(x, y + h) + u.value(x, y - h) - 4 * u.value(x, y)) / h**2


def test_torus_combination_is_an_eigenfunction():
    rng = np.random.default_rng(3)
    pts = shell(25).points
    u = torus_eigenfunction([(l, complex(*rng.standard_normal(2))) for l in pts])
    for x, y in rng.uniform(-3, 3, size=(5, 2)):
        lap = _laplacian_flat(u, x, y, h=1e-3)
        assert lap == pytest.approx(-25 * u.value(x, y), abs=1e-3 * u.sup_bound() * 25)


def test_rectangle_mode_is_a_dirichlet_eigenfunction():
    u = rectangle_mode(3, 2, a=2.0, b=1.5)
    lam = (3 * math.pi / 2.0) ** 2 + (2 * math.pi / 1.5) ** 2
    assert u.eigenvalue == pytest.approx(lam)
    for x, y in [(0.3, 0.2), (1.1, 0.7), (1.7, 1.3)]:
        assert _laplacian_flat(u, x, y) == pytest.approx(-lam * u.value(x, y), abs=1e-3 * lam)
    assert u.value(0.0, 0.8) == 0 and abs(u.value(2.0, 0.8)) < 1e-14 and abs(u.value(1.0, 1.5)) < 1e-14


@pytest.mark.parametrize("ell,m", [(1, 0), (3, 1), (4, -2), (5, 3), (6, 6)])
def test_sphere_harmonic_satisfies_spherical_laplacian(ell, m):
    u = sphere_harmonic(ell, m)
    h = 1e-3
    for phi, th in [(0.4, 0.9), (-2.0, 1.7), (2.5, 2.4)]:
        f = lambda p, t: float(u.value(p, t))  # noqa: E731
        d_theta = (math.sin(th + h / 2) * (f(phi, th + h) - f(phi, th))
                   - math.sin(th - h / 2) * (f(phi, th) - f(phi, th - h))) / (h * h * math.sin(th))
        d_phi = (f(phi + h, th) - 2 * f(phi, th) + f(phi - h, th)) / (h * h * math.sin(th) ** 2)
        assert d_theta + d_phi == pytest.approx(-ell * (ell + 1) * f(phi, th), abs=1e-4 * ell * (ell + 1) * u.sup_bound())


def test_product_mode_partials_against_closed_form():
    u = product_mode(2, 1)
    x, y = 0.37, -1.2
    assert eval_u(u, (x, y)) == pytest.approx(math.cos(2 * x) * math.cos(y))
    assert partial(u, (x, y), (1, 0)) == pytest.approx(-2 * math.sin(2 * x) * math.cos(y))
    assert partial(u, (x, y), (1, 1)) == pytest.approx(2 * math.sin(2 * x) * math.sin(y))
    assert partial(u, (x, y), (4, 3)) == pytest.approx(16 * math.cos(2 * x) * math.sin(y))


def _local_fd(u, p, alpha):
    """Central finite differences of u composed with the local chart about p."""
    f = lambda a, b: float(u.value(*u.local_to_chart(p, (a, b))))  # noqa: E731
    if alpha == (1, 0):
        return (f(H, 0) - f(-H, 0)) / (2 * H)
    if alpha == (0, 1):
        return (f(0, H) - f(0, -H)) / (2 * H)
    if alpha == (2, 0):
        return (f(H, 0) - 2 * f(0, 0) + f(-H, 0)) / H**2
    if alpha == (0, 2):
        return (f(0, H) - 2 * f(0, 0) + f(0, -H)) / H**2
    return (f(H, H) - f(H, -H) - f(-H, H) + f(-H, -H)) / (4 * H * H)


@pytest.mark.parametrize("u", [sphere_harmonic(4, 2), sphere_harmonic(5, -3), rectangle_mode(2, 3),
                               torus_eigenfunction([((3, 4), 0.5 + 0.2j), ((5, 0), -0.7), ((0, -5), 0.3j)])],
                         ids=["Y42", "Y5-3", "rect23", "torus25"])
@pytest.mark.parametrize("alpha", [(1, 0), (0, 1), (2, 0), (0, 2), (1, 1)])
def test_partials_match_finite_differences(u, alpha):
    for p in [(0.7, 1.1), (-2.3, 2.0)]:
        exact = partial(u, p, alpha)
        fd = _local_fd(u, p, alpha)
        scale = u.sup_bound() * max(u.eigenvalue, 1) ** (sum(alpha) / 2)
        assert exact == pytest.approx(fd, abs=1e-5 * scale)


def test_derivative_order_cap():
    u = product_mode(1, 1)
    with pytest.raises(DerivativeOrderError):
        partial(u, (0.0, 0.0), (20, 13))
    with pytest.raises(ValueError):
        partial(u, (0.0, 0.0), (-1, 0))


def test_pole_vanishing_profile():
    # Y_{5,3} ~ sin^3(theta) near the north pole: the first nonzero derivatives have order 3
    prof = derivative_profile(sphere_harmonic(5, 3), (0.0, 0.0), 6)
    assert np.all(prof[:3] < 1e-12) and prof[3] > 1e-3


def test_eigenvalue_indices():
    # shells below 5: 0 (1 point), 1 (4), 2 (4), 4 (4) -> 13 eigenvalues below, so index 14
    assert torus_index(5) == 14
    assert torus_index(1) == 2
    assert torus_index(0) == 1
    assert eigenvalue_index(sphere_harmonic(3, 1)) == 10
    assert eigenvalue_index(rectangle_mode(1, 1)) == 1
    assert eigenvalue_index(rectangle_mode(2, 1)) == 2
    assert eigenvalue_index(rectangle_mode(2, 2)) == 4


def test_constructor_validation():
    with pytest.raises(ValueError):
        torus_eigenfunction([((1, 0), 1.0), ((1, 1), 1.0)])
    with pytest.raises(ValueError):
        torus_eigenfunction([((1, 0), 1.0), ((1, 0), 2.0)])
    with pytest.raises(ValueError):
        torus_eigenfunction([((1, 0), 0.0)])
    with pytest.raises(ValueError):
        sphere_harmonic(2, 3)
    with pytest.raises(ValueError):
        rectangle_mode(0, 1)


@pytest.mark.parametrize("u", [product_mode(3, 2), sphere_harmonic(4, -1), rectangle_mode(2, 5, 1.0, 2.0)])
def test_json_roundtrip(u):
    v = from_json(u.to_json())
    assert v == u
    assert eval_u(v, (0.3, 0.4)) == eval_u(u, (0.3, 0.4))
