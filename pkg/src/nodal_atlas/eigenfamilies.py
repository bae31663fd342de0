"""Closed-form Laplace eigenfunctions on the model surfaces.

Three families are supported:

* ``TorusFourier``: ``u(x) = Re sum_l mu_l exp(i <l, x>)`` with every ``l`` on
  one lattice shell ``|l|^2 = lambda``;
* ``SphereHarmonic``: ``Y_{l,m}(phi, theta) = P_l^|m|(cos theta) cos(m phi)``
  (``sin(|m| phi)`` for ``m < 0``), eigenvalue ``l (l + 1)``;
* ``RectangleSine``: ``sin(j pi x / a) sin(k pi y / b)`` with Dirichlet
  boundary values.

Besides pointwise values every family exposes its Taylor coefficients in a
local chart around any point (:meth:`Eigenfunction.taylor`). For the flat
families the local chart is the translated chart itself; on the sphere it is
the orthographic projection onto the tangent plane, so the poles are no
different from any other point.
"""

from __future__ import annotations

import enum
import math
from functools import lru_cache
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.polynomial import polynomial as nppoly

from .surfaces import (
    SurfaceDescriptor,
    make_surface,
    sphere_to_xyz,
    wrap_point,
    xyz_to_sphere,
)

MAX_DERIVATIVE_ORDER = 32


class Family(str, enum.Enum):
    TORUS_FOURIER = "TorusFourier"
    SPHERE_HARMONIC = "SphereHarmonic"
    RECTANGLE_SINE = "RectangleSine"


class DerivativeOrderError(ValueError):
    pass


# -- truncated bivariate power series -------------------------------------
# A series is a square array c with c[a, b] the coefficient of dx^a dy^b;
# entries with a + b > N are kept at zero.


def _triangle_mask(n: int) -> np.ndarray:
    a = np.arange(n + 1)
    return (a[:, None] + a[None, :]) <= n


def _tmul(A: np.ndarray, B: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n + 1, n + 1), dtype=np.result_type(A, B))
    for a in range(n + 1):
        for b in range(n + 1 - a):
            c = A[a, b]
            if c == 0:
                continue
            out[a:, b:] += c * B[: n + 1 - a, : n + 1 - b]
    out[~_triangle_mask(n)] = 0
    return out


def _tpoly(coeffs, X: np.ndarray, n: int) -> np.ndarray:
    """Evaluate a univariate polynomial (ascending coefficients) at series X."""
    out = np.zeros_like(X, dtype=np.result_type(X, np.asarray(coeffs)))
    for c in reversed(list(coeffs)):
        out = _tmul(out, X, n)
        out[0, 0] += c
    return out


def _linear_series(c0: float, cx: float, cy: float, n: int) -> np.ndarray:
    s = np.zeros((n + 1, n + 1))
    s[0, 0] = c0
    if n >= 1:
        s[1, 0] = cx
        s[0, 1] = cy
    return s


def _sqrt_one_minus_r2(n: int) -> np.ndarray:
    """Series of ``sqrt(1 - dx^2 - dy^2)`` about the origin."""
    s = np.zeros((n + 1, n + 1))
    if n >= 2:
        s[2, 0] = s[0, 2] = 1.0
    out = np.zeros((n + 1, n + 1))
    power = np.zeros((n + 1, n + 1))
    power[0, 0] = 1.0
    coef = 1.0  # binom(1/2, k) (-1)^k
    for k in range(n // 2 + 1):
        out += coef * power
        power = _tmul(power, s, n)
        coef *= -(0.5 - k) / (k + 1)
    return out


# -- associated Legendre ------------------------------------------------------


def associated_legendre(ell: int, m: int, t):
    """``P_ell^m(t)`` by upward recurrence in ``ell`` starting from ``P_m^m``.

    No Condon-Shortley phase is applied: ``P_m^m(t) = (2m-1)!! (1-t^2)^{m/2}``.
    Sign conventions do not change zero sets.
    """
    if not (0 <= m <= ell):
        raise ValueError(f"need 0 <= m <= ell, got ell={ell}, m={m}")
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0):
        raise ValueError("t must lie in [-1, 1]")
    dfact = 1.0
    for i in range(1, 2 * m, 2):
        dfact *= i
    pmm = dfact * np.power(np.clip(1.0 - t * t, 0.0, None), 0.5 * m)
    if ell == m:
        return pmm if pmm.ndim else float(pmm)
    p_prev, p = pmm, t * (2 * m + 1) * pmm
    for l in range(m + 2, ell + 1):
        p_prev, p = p, (t * (2 * l - 1) * p - (l + m - 1) * p_prev) / (l - m)
    return p if p.ndim else float(p)


@lru_cache(maxsize=256)
def _legendre_derivative_poly(ell: int, m: int) -> np.ndarray:
    """Ascending coefficients of ``d^m/dt^m P_ell(t)``."""
    basis = np.zeros(ell + 1)
    basis[ell] = 1.0
    power = npleg.leg2poly(basis)
    return nppoly.polyder(power, m) if m else power


# -- the eigenfunction type ---------------------------------------------------


@dataclass(frozen=True)
class Eigenfunction:
    family: Family
    eigenvalue: float
    modes: tuple[tuple[tuple[int, int], complex], ...] = ()
    ell: int | None = None
    m: int | None = None
    j: int | None = None
    k: int | None = None
    a: float | None = None
    b: float | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    # -- construction helpers live at module level; these are accessors --

    @property
    def surface(self) -> SurfaceDescriptor:
        if self.family is Family.TORUS_FOURIER:
            return make_surface("torus")
        if self.family is Family.SPHERE_HARMONIC:
            return make_surface("sphere")
        return make_surface("rectangle", (self.a, self.b))

    @property
    def lattice_points(self) -> np.ndarray:
        return np.array([l for l, _ in self.modes], dtype=np.int64).reshape(-1, 2)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.modes], dtype=complex)

    def sup_bound(self) -> float:
        """An upper bound (torus, rectangle) or estimate (sphere) of ``max |u|``."""
        if self.family is Family.TORUS_FOURIER:
            return float(np.sum(np.abs(self.coefficients)))
        if self.family is Family.RECTANGLE_SINE:
            return 1.0
        if "sup" not in self._cache:
            t = np.cos(np.linspace(0.0, math.pi, 4001))
            self._cache["sup"] = float(np.max(np.abs(associated_legendre(self.ell, abs(self.m), t))))
        return self._cache["sup"]

    # -- pointwise values ---------------------------------------------------

    def value(self, x, y):
        """Vectorised evaluation at chart coordinates ``(x, y)``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.family is Family.TORUS_FOURIER:
            L = self.lattice_points.astype(float)
            phase = np.multiply.outer(x, L[:, 0]) + np.multiply.outer(y, L[:, 1])
            return np.real(np.exp(1j * phase) @ self.coefficients)
        if self.family is Family.SPHERE_HARMONIC:
            return self._legendre_part(y) * self._azimuth_part(x)
        J, K = self.wavenumbers
        return np.sin(J * x) * np.sin(K * y)

    def grid_values(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """``out[i, j] = u(xs[i], ys[j])`` using separability where possible."""
        xs = np.asarray(xs, float)
        ys = np.asarray(ys, float)
        if self.family is Family.TORUS_FOURIER:
            L = self.lattice_points.astype(float)
            ex = np.exp(1j * np.multiply.outer(xs, L[:, 0]))
            ey = np.exp(1j * np.multiply.outer(ys, L[:, 1]))
            return np.real((ex * self.coefficients) @ ey.T)
        if self.family is Family.SPHERE_HARMONIC:
            return np.multiply.outer(self._azimuth_part(xs), self._legendre_part(ys))
        J, K = self.wavenumbers
        return np.multiply.outer(np.sin(J * xs), np.sin(K * ys))

    def grid_gradient(self, xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Chart partial derivatives on a tensor grid."""
        xs = np.asarray(xs, float)
        ys = np.asarray(ys, float)
        if self.family is Family.TORUS_FOURIER:
            L = self.lattice_points.astype(float)
            ex = np.exp(1j * np.multiply.outer(xs, L[:, 0]))
            ey = np.exp(1j * np.multiply.outer(ys, L[:, 1]))
            c = self.coefficients
            gx = np.real((ex * (1j * L[:, 0] * c)) @ ey.T)
            gy = np.real((ex * c) @ (ey * (1j * L[:, 1])).T)
            return gx, gy
        if self.family is Family.SPHERE_HARMONIC:
            d = 1e-6
            az = self._azimuth_part(xs)
            daz = (self._azimuth_part(xs + d) - self._azimuth_part(xs - d)) / (2 * d)
            leg = self._legendre_part(ys)
            dleg = (self._legendre_part(ys + d) - self._legendre_part(ys - d)) / (2 * d)
            return np.multiply.outer(daz, leg), np.multiply.outer(az, dleg)
        J, K = self.wavenumbers
        return (np.multiply.outer(J * np.cos(J * xs), np.sin(K * ys)),
                np.multiply.outer(np.sin(J * xs), K * np.cos(K * ys)))

    @property
    def wavenumbers(self) -> tuple[float, float]:
        return (self.j * math.pi / self.a, self.k * math.pi / self.b)

    def _legendre_part(self, theta):
        return associated_legendre(self.ell, abs(self.m), np.clip(np.cos(theta), -1.0, 1.0))

    def _azimuth_part(self, phi):
        phi = np.asarray(phi, float)
        if self.m == 0:
            return np.ones_like(phi)
        if self.m > 0:
            return np.cos(self.m * phi)
        return np.sin(-self.m * phi)

    # -- local charts and Taylor coefficients --------------------------------

    def local_to_chart(self, p, delta) -> tuple[float, float]:
        """Chart point with local-chart coordinates ``delta`` about ``p``."""
        surf = self.surface
        if self.family is not Family.SPHERE_HARMONIC:
            return wrap_point(surf, (p[0] + delta[0], p[1] + delta[1]))
        z, e1, e2 = _sphere_frame(p)
        r2 = delta[0] ** 2 + delta[1] ** 2
        if r2 >= 1.0:
            v = delta[0] * e1 + delta[1] * e2
        else:
            v = math.sqrt(1.0 - r2) * z + delta[0] * e1 + delta[1] * e2
        phi, theta = xyz_to_sphere(v)
        return wrap_point(surf, (float(phi), float(theta)))

    def circle_points(self, p, radius: float, angles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Chart coordinates of the local-chart circle of ``radius`` about ``p``.

        On the sphere this is the geodesic circle, traced by the exponential map.
        """
        c, s = radius * np.cos(angles), radius * np.sin(angles)
        if self.family is not Family.SPHERE_HARMONIC:
            return p[0] + c, p[1] + s
        z, e1, e2 = _sphere_frame(p)
        d = np.cos(radius) * z + np.sin(radius) * (np.outer(np.cos(angles), e1) + np.outer(np.sin(angles), e2))
        return xyz_to_sphere(d)

    def taylor(self, p, order: int) -> np.ndarray:
        """Taylor coefficients ``c[a, b]`` of ``u`` about ``p`` in the local chart.

        ``c[a, b] = d^a_x d^b_y u(p) / (a! b!)`` for ``a + b <= order``.
        """
        if order > MAX_DERIVATIVE_ORDER:
            raise DerivativeOrderError(f"derivative order {order} exceeds cap {MAX_DERIVATIVE_ORDER}")
        n = order
        if self.family is Family.TORUS_FOURIER:
            L = self.lattice_points
            c = self.coefficients * np.exp(1j * (L.astype(float) @ np.asarray(p, float)))
            A = _scaled_powers(L[:, 0], n)
            B = _scaled_powers(L[:, 1], n)
            out = np.real((A * c) @ B.T)
        elif self.family is Family.RECTANGLE_SINE:
            J, K = self.wavenumbers
            out = np.outer(_sin_series(J, p[0], n), _sin_series(K, p[1], n))
        else:
            out = self._sphere_taylor(p, n)
        out[~_triangle_mask(n)] = 0.0
        return out

    def _sphere_taylor(self, p, n: int) -> np.ndarray:
        z, e1, e2 = _sphere_frame(p)
        w = _sqrt_one_minus_r2(n)
        comp = []
        for i in range(3):
            s = w * z[i]
            s += _linear_series(0.0, e1[i], e2[i], n)
            comp.append(s)
        X, Y, Z = comp
        mm = abs(self.m)
        q = _tpoly(_legendre_derivative_poly(self.ell, mm), Z, n)
        if mm == 0:
            return q
        base = X + 1j * Y
        power = np.zeros((n + 1, n + 1), dtype=complex)
        power[0, 0] = 1.0
        for _ in range(mm):
            power = _tmul(power, base, n)
        ang = power.real if self.m > 0 else power.imag
        return _tmul(ang, q, n)

    def to_json(self) -> dict:
        return {
            "family": self.family.value,
            "modes": [{"l": [int(l[0]), int(l[1])], "re": float(c.real), "im": float(c.imag)}
                      for l, c in self.modes],
            "ell": self.ell, "m": self.m, "j": self.j, "k": self.k,
            "a": self.a, "b": self.b, "lambda": self.eigenvalue,
        }

    def label(self) -> str:
        if self.family is Family.SPHERE_HARMONIC:
            return f"Y[{self.ell},{self.m}]"
        if self.family is Family.RECTANGLE_SINE:
            return f"rect[{self.j},{self.k}]"
        return f"torus[lambda={int(self.eigenvalue)},modes={len(self.modes)}]"


def _scaled_powers(l: np.ndarray, n: int) -> np.ndarray:
    """``(i l)^a / a!`` for a = 0..n, rows indexed by ``a``."""
    out = np.empty((n + 1, len(l)), dtype=complex)
    out[0] = 1.0
    il = 1j * l.astype(float)
    for a in range(1, n + 1):
        out[a] = out[a - 1] * il / a
    return out


def _sin_series(w: float, x0: float, n: int) -> np.ndarray:
    """Taylor coefficients of ``sin(w x)`` about ``x0``."""
    s, c = math.sin(w * x0), math.cos(w * x0)
    cyc = (s, c, -s, -c)
    out = np.empty(n + 1)
    scale = 1.0
    for a in range(n + 1):
        out[a] = cyc[a % 4] * scale
        scale *= w / (a + 1)
    return out


def _sphere_frame(p):
    phi, theta = float(p[0]), float(p[1])
    z = sphere_to_xyz(phi, theta)
    e1 = np.array([-math.sin(phi), math.cos(phi), 0.0])
    e2 = np.array([math.cos(theta) * math.cos(phi), math.cos(theta) * math.sin(phi), -math.sin(theta)])
    return z, e1, e2


# -- constructors ---------------------------------------------------------------


def torus_eigenfunction(modes) -> Eigenfunction:
    """Real part of a Fourier combination over one lattice shell."""
    cleaned = []
    seen = set()
    lam = None
    for l, c in modes:
        l = (int(l[0]), int(l[1]))
        if l in seen:
            raise ValueError(f"duplicate lattice point {l}")
        seen.add(l)
        r = l[0] ** 2 + l[1] ** 2
        if lam is None:
            lam = r
        elif r != lam:
            raise ValueError(f"lattice point {l} is not on the shell |l|^2 = {lam}")
        cleaned.append((l, complex(c)))
    if not cleaned or all(c == 0 for _, c in cleaned):
        raise ValueError("need at least one nonzero coefficient")
    return Eigenfunction(Family.TORUS_FOURIER, float(lam), modes=tuple(cleaned))


def product_mode(l1: int, l2: int) -> Eigenfunction:
    """``cos(l1 x) cos(l2 y)`` written over the four modes ``(+-l1, +-l2)``."""
    if l1 < 1 or l2 < 1:
        raise ValueError("product mode indices must be >= 1")
    pts = sorted({(s1 * l1, s2 * l2) for s1 in (1, -1) for s2 in (1, -1)})
    return torus_eigenfunction([(l, 0.25) for l in pts])


def sphere_harmonic(ell: int, m: int) -> Eigenfunction:
    if ell < 0 or abs(m) > ell:
        raise ValueError(f"need ell >= 0 and |m| <= ell, got ({ell}, {m})")
    return Eigenfunction(Family.SPHERE_HARMONIC, float(ell * (ell + 1)), ell=ell, m=m)


def rectangle_mode(j: int, k: int, a: float = math.pi, b: float = math.pi) -> Eigenfunction:
    if j < 1 or k < 1:
        raise ValueError("rectangle indices must be >= 1")
    make_surface("rectangle", (a, b))
    lam = (j * math.pi / a) ** 2 + (k * math.pi / b) ** 2
    return Eigenfunction(Family.RECTANGLE_SINE, lam, j=j, k=k, a=float(a), b=float(b))


def from_json(d: dict) -> Eigenfunction:
    fam = Family(d["family"])
    if fam is Family.TORUS_FOURIER:
        return torus_eigenfunction([(m["l"], complex(m["re"], m.get("im", 0.0))) for m in d["modes"]])
    if fam is Family.SPHERE_HARMONIC:
        return sphere_harmonic(int(d["ell"]), int(d["m"]))
    return rectangle_mode(int(d["j"]), int(d["k"]), float(d["a"]), float(d["b"]))


# -- pointwise operations -----------------------------------------------------


def eval(u: Eigenfunction, p) -> float:  # noqa: A001 - mirrors the documented operation name
    return float(u.value(p[0], p[1]))


def partial(u: Eigenfunction, p, alpha) -> float:
    """Partial derivative ``D^alpha u(p)`` in the local chart at ``p``.

    Exact for every family: trigonometric differentiation on the flat charts,
    truncated power-series arithmetic in the orthographic chart on the sphere.
    """
    a, b = int(alpha[0]), int(alpha[1])
    if a < 0 or b < 0:
        raise ValueError("multi-index entries must be nonnegative")
    if a + b > MAX_DERIVATIVE_ORDER:
        raise DerivativeOrderError(f"|alpha| = {a + b} exceeds cap {MAX_DERIVATIVE_ORDER}")
    c = u.taylor(p, a + b)
    return float(c[a, b] * math.factorial(a) * math.factorial(b))


def derivative_profile(u: Eigenfunction, p, cap: int = 16) -> np.ndarray:
    """Normalised derivative sizes at ``p``, one entry per total order ``k <= cap``.

    ``D_k = max_{|alpha| = k} |D^alpha u(p)| / (sup|u| * lambda^{k/2})``; the
    denominator is the Bernstein scale of an order-``k`` derivative, so a
    genuinely nonzero entry is of order one while a vanishing one sits at
    rounding level.
    """
    c = u.taylor(p, cap)
    lam = max(u.eigenvalue, 1.0)
    sup = u.sup_bound()
    out = np.zeros(cap + 1)
    for a in range(cap + 1):
        for b in range(cap + 1 - a):
            d = abs(c[a, b]) * math.factorial(a) * math.factorial(b)
            out[a + b] = max(out[a + b], d)
    return out / (sup * lam ** (np.arange(cap + 1) / 2))


def torus_index(lam: float) -> int:
    """``1 + #{l in Z^2 : |l|^2 < lam}`` by direct enumeration."""
    r = math.isqrt(max(int(math.ceil(lam)), 0)) + 1
    g = np.arange(-r, r + 1)
    norms = g[:, None] ** 2 + g[None, :] ** 2
    return int(np.count_nonzero(norms < lam - 1e-9)) + 1


def eigenvalue_index(u: Eigenfunction) -> int:
    """Smallest ``k`` with ``lambda_k`` equal to the eigenvalue of ``u``."""
    if u.family is Family.SPHERE_HARMONIC:
        return u.ell ** 2 + 1
    if u.family is Family.TORUS_FOURIER:
        return torus_index(u.eigenvalue)
    # count (j', k') with strictly smaller j'^2/a^2 + k'^2/b^2
    target = u.j ** 2 / u.a ** 2 + u.k ** 2 / u.b ** 2
    tol = 1e-12 * target
    count = 0
    jp = 1
    while jp ** 2 / u.a ** 2 < target:
        kp = 1
        while jp ** 2 / u.a ** 2 + kp ** 2 / u.b ** 2 < target - tol:
            count += 1
            kp += 1
        jp += 1
    return count + 1
