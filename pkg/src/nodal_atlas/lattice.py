"""Sums of two squares, lattice shells and eigenfunctions of prescribed
vanishing order on the flat torus."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .eigenfamilies import Eigenfunction, derivative_profile, torus_eigenfunction, torus_index
from .nodal_extract import taylor_arc_count

BRUTEFORCE_LIMIT = 10 ** 8
SEARCH_LIMIT = 10 ** 7
PIVOT_TOLERANCE = 1e-8
ORDER_CAP = 16
CERTIFICATE_TOLERANCE = 1e-9
ORDER_TOLERANCE = 1e-7


class ConstructionFailed(RuntimeError):
    pass


class ShellNotFound(RuntimeError):
    pass


@lru_cache(maxsize=1)
def _small_primes(limit: int = 10 ** 4) -> tuple[int, ...]:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return tuple(int(p) for p in np.flatnonzero(sieve))


def factorize(n: int) -> dict[int, int]:
    """Trial division; complete for ``n <= 10^8``."""
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    out: dict[int, int] = {}
    for p in _small_primes():
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def r2_formula(n: int) -> int:
    """Ordered representations ``n = l1^2 + l2^2`` from the prime factorisation.

    ``4 prod (1 + a_i)`` over primes ``p_i = 1 mod 4`` when every prime
    ``3 mod 4`` occurs to an even power, otherwise 0. ``n = 0`` returns 1
    (the origin) by convention.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 1
    count = 4
    for p, e in factorize(n).items():
        if p % 4 == 3 and e % 2:
            return 0
        if p % 4 == 1:
            count *= 1 + e
    return count


def r2_bruteforce(n: int) -> int:
    """Count pairs by scanning ``l1`` and testing whether ``n - l1^2`` is a square."""
    n = int(n)
    if n < 0 or n > BRUTEFORCE_LIMIT:
        raise ValueError(f"brute force limited to 0 <= n <= {BRUTEFORCE_LIMIT}")
    r = math.isqrt(n)
    count = 0
    for l1 in range(-r, r + 1):
        rest = n - l1 * l1
        s = math.isqrt(rest)
        if s * s == rest:
            count += 1 if s == 0 else 2
    return count


def r2_table(limit: int) -> np.ndarray:
    """``r2(n)`` for every ``0 <= n <= limit`` by enumerating the whole disc."""
    r = math.isqrt(limit)
    g = np.arange(-r, r + 1, dtype=np.int64)
    norms = (g[:, None] ** 2 + g[None, :] ** 2).ravel()
    return np.bincount(norms[norms <= limit], minlength=limit + 1)


@dataclass(frozen=True)
class LatticeShell:
    lam: int
    points: tuple[tuple[int, int], ...]

    @property
    def r2(self) -> int:
        return len(self.points)


def shell(lam: int) -> LatticeShell:
    """All ``l in Z^2`` with ``|l|^2 = lam`` in a fixed (lexicographic) order."""
    lam = int(lam)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    pts = []
    r = math.isqrt(lam)
    for l1 in range(-r, r + 1):
        rest = lam - l1 * l1
        s = math.isqrt(rest)
        if s * s == rest:
            pts.extend({(l1, -s), (l1, s)})
    return LatticeShell(lam, tuple(sorted(pts)))


def courant_index_of_shell(lam: int) -> int:
    return torus_index(lam)


def multi_indices(n: int) -> list[tuple[int, int]]:
    """``{alpha in N_0^2 : |alpha| <= n}`` ordered by total degree."""
    return [(a, d - a) for d in range(n + 1) for a in range(d, -1, -1)]


def equation_count(n: int) -> int:
    return (n + 1) * (n + 2) // 2


def smallest_admissible_shell(n: int) -> int:
    """Smallest ``lambda`` whose shell has more points than moment equations."""
    need = equation_count(n)
    for lam in range(1, SEARCH_LIMIT + 1):
        if r2_formula(lam) > need:
            return lam
    raise ShellNotFound(f"no shell with r2 > {need} below {SEARCH_LIMIT}")


@dataclass(frozen=True)
class MomentSystem:
    n: int
    lam: int
    alphas: tuple[tuple[int, int], ...]
    points: tuple[tuple[int, int], ...]
    matrix: np.ndarray  # rows alpha, columns k; row alpha scaled by lam^{-|alpha|/2}

    @classmethod
    def build(cls, n: int, sh: LatticeShell) -> "MomentSystem":
        alphas = multi_indices(n)
        K = np.array(sh.points, dtype=float)
        rows = []
        for a, b in alphas:
            scale = float(sh.lam) ** (-(a + b) / 2) if sh.lam else 1.0
            rows.append((K[:, 0] ** a) * (K[:, 1] ** b) * scale)
        return cls(n, sh.lam, tuple(alphas), sh.points, np.array(rows))

    def null_space(self) -> np.ndarray:
        """Orthonormal null-space basis via column-pivoted QR of the transpose."""
        A = self.matrix
        q, r, _ = scipy.linalg.qr(A.T, mode="full", pivoting=True)
        diag = np.abs(np.diag(r))
        if diag.size == 0:
            return q
        rank = int(np.count_nonzero(diag > PIVOT_TOLERANCE * diag[0]))
        return q[:, rank:]

    def residual(self, mu: np.ndarray) -> float:
        return float(np.max(np.abs(self.matrix @ mu)) / max(np.linalg.norm(mu), 1e-300))


@dataclass(frozen=True)
class VanishingCertificate:
    n: int
    lam: int
    equations: int
    r2: int
    mu: tuple[tuple[tuple[int, int], complex], ...]
    residual_max: float
    taylor_max: float
    attained_order: int
    arcs_at_origin: int | None = None

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "lambda": self.lam,
            "C": self.equations,
            "r2": self.r2,
            "mu": [{"l": list(l), "re": c.real, "im": c.imag} for l, c in self.mu],
            "residual_max": self.residual_max,
            "taylor_max": self.taylor_max,
            "attained_order": self.attained_order,
            "arcs_at_origin": self.arcs_at_origin,
        }


def _real_part_nonzero(pts, mu: np.ndarray) -> bool:
    """Whether ``Re sum mu_k e^{i<k,x>}`` is not identically zero."""
    index = {p: i for i, p in enumerate(pts)}
    scale = np.max(np.abs(mu))
    for p, i in index.items():
        j = index[(-p[0], -p[1])]
        # Re part has cosine coefficient Re(mu_k + mu_-k), sine coefficient Im(mu_-k - mu_k)
        if abs((mu[i] + mu[j]).real) > 1e-9 * scale or abs((mu[j] - mu[i]).imag) > 1e-9 * scale:
            return True
    return False


def construct_high_vanishing(n: int, five_power_shell: bool = False) -> tuple[Eigenfunction, VanishingCertificate]:
    """Torus eigenfunction vanishing to order at least ``n`` at the origin.

    The shell is the smallest ``lambda`` with more lattice points than moment
    equations ``(n+1)(n+2)/2``; ``five_power_shell`` selects ``5^C`` instead
    (allowed for ``n <= 4``).
    """
    if not 1 <= n <= 8:
        raise ValueError("construct_high_vanishing supports 1 <= n <= 8")
    C = equation_count(n)
    if five_power_shell:
        if n > 4:
            raise ValueError("the 5^C shell is only offered for n <= 4")
        lam = 5 ** C
    else:
        lam = smallest_admissible_shell(n)
    sh = shell(lam)
    system = MomentSystem.build(n, sh)
    basis = system.null_space()
    if basis.shape[1] == 0:
        raise ConstructionFailed(f"moment system for n={n} on lambda={lam} has trivial null space")

    # deterministic generic combination of the null vectors; real coefficients
    weights = np.cos(np.arange(1, basis.shape[1] + 1) * 1.2345)
    mu = basis @ weights
    coeff = mu.astype(complex)
    if not _real_part_nonzero(sh.points, coeff):
        coeff = -1j * coeff  # Re(-i z) = Im z
    if not _real_part_nonzero(sh.points, coeff):
        for col in range(basis.shape[1]):
            coeff = basis[:, col].astype(complex)
            if _real_part_nonzero(sh.points, coeff) or _real_part_nonzero(sh.points, -1j * coeff):
                coeff = coeff if _real_part_nonzero(sh.points, coeff) else -1j * coeff
                break
        else:
            raise ConstructionFailed("every null vector gives an identically vanishing real part")
    coeff = coeff / np.max(np.abs(coeff))
    u = torus_eigenfunction(list(zip(sh.points, coeff)))

    profile = derivative_profile(u, (0.0, 0.0), ORDER_CAP)
    taylor_max = float(np.max(profile[: n + 1]))
    nonzero = np.flatnonzero(profile > ORDER_TOLERANCE)
    attained = int(nonzero[0]) if nonzero.size else ORDER_CAP + 1
    cert = VanishingCertificate(
        n=n, lam=lam, equations=C, r2=sh.r2,
        mu=tuple(zip(sh.points, (complex(c) for c in coeff))),
        residual_max=system.residual(mu),
        taylor_max=taylor_max,
        attained_order=attained,
        arcs_at_origin=taylor_arc_count(u, (0.0, 0.0), attained) if attained <= ORDER_CAP else None,
    )
    return u, cert
