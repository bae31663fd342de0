"""Model surfaces: charts, identifications and topological invariants."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


class SurfaceKind(str, enum.Enum):
    FLAT_TORUS = "torus"
    SPHERE = "sphere"
    RECTANGLE = "rectangle"


@dataclass(frozen=True)
class SurfaceDescriptor:
    """A model surface together with the chart used to sample it.

    Chart conventions:

    * torus: ``(x, y)`` in the half-open cell ``[-pi, pi)^2``, opposite sides glued;
    * sphere: ``(phi, theta)`` in ``[-pi, pi) x [0, pi]``, the meridians
      ``phi = -pi`` and ``phi = pi`` glued and each of ``theta = 0, pi``
      collapsed to a pole;
    * rectangle: ``[0, a] x [0, b]`` with no identifications; the boundary
      is a single contour.
    """

    kind: SurfaceKind
    chart_extent: tuple[tuple[float, float], tuple[float, float]]
    identifications: str
    euler_characteristic: int
    contour_count: int
    genus: int
    orientable: bool = True

    @property
    def chi(self) -> int:
        return self.euler_characteristic

    @property
    def q(self) -> int:
        return self.contour_count

    @property
    def periodic(self) -> tuple[bool, bool]:
        """Which chart axes wrap around."""
        if self.kind is SurfaceKind.FLAT_TORUS:
            return (True, True)
        if self.kind is SurfaceKind.SPHERE:
            return (True, False)
        return (False, False)

    @property
    def side_lengths(self) -> tuple[float, float]:
        (x0, x1), (y0, y1) = self.chart_extent
        return (x1 - x0, y1 - y0)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "chart_extent": [list(self.chart_extent[0]), list(self.chart_extent[1])],
            "chi": self.euler_characteristic,
            "q": self.contour_count,
            "genus": self.genus,
            "orientable": self.orientable,
        }


def make_surface(kind: SurfaceKind | str, dimensions: tuple[float, float] | None = None) -> SurfaceDescriptor:
    """Build one of the three supported surfaces.

    ``dimensions`` is only read for the rectangle (side lengths ``a, b``).
    The torus has side ``2 pi`` and the sphere unit radius.
    """
    kind = SurfaceKind(kind)
    if kind is SurfaceKind.FLAT_TORUS:
        return SurfaceDescriptor(
            kind, ((-math.pi, math.pi), (-math.pi, math.pi)),
            "opposite sides identified", euler_characteristic=0,
            contour_count=0, genus=1,
        )
    if kind is SurfaceKind.SPHERE:
        return SurfaceDescriptor(
            kind, ((-math.pi, math.pi), (0.0, math.pi)),
            "phi=-pi ~ phi=pi; theta=0 and theta=pi each collapsed to a pole",
            euler_characteristic=2, contour_count=0, genus=0,
        )
    if dimensions is None:
        dimensions = (math.pi, math.pi)
    a, b = (float(d) for d in dimensions)
    if not (a > 0 and b > 0) or not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"rectangle side lengths must be positive, got {dimensions!r}")
    # planar domain with q contours: chi = 2 - q
    return SurfaceDescriptor(
        kind, ((0.0, a), (0.0, b)), "none",
        euler_characteristic=1, contour_count=1, genus=0,
    )


def _wrap_angle(t: float) -> float:
    """Representative of ``t`` modulo 2 pi in ``[-pi, pi)``."""
    if -math.pi <= t < math.pi:
        return t
    r = math.fmod(t + math.pi, TWO_PI)
    if r < 0:
        r += TWO_PI
    r -= math.pi
    if r >= math.pi or r < -math.pi:
        r = -math.pi
    return r


def wrap_point(surface: SurfaceDescriptor, p) -> tuple[float, float]:
    """Canonical chart representative of ``p`` under the surface identifications."""
    x, y = float(p[0]), float(p[1])
    if surface.kind is SurfaceKind.FLAT_TORUS:
        return (_wrap_angle(x), _wrap_angle(y))
    if surface.kind is SurfaceKind.SPHERE:
        # fold theta into [0, 2pi) then reflect through the poles
        th = math.fmod(y, TWO_PI)
        if th < 0:
            th += TWO_PI
        if th > math.pi:
            th = TWO_PI - th
            x += math.pi
        if th == 0.0 or th == math.pi:
            return (0.0, th)
        return (_wrap_angle(x), th)
    return (x, y)


def sphere_to_xyz(phi, theta):
    """Unit vectors for chart points ``(phi, theta)``; works on arrays."""
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def xyz_to_sphere(v):
    v = np.asarray(v, dtype=float)
    r = np.linalg.norm(v, axis=-1)
    theta = np.arccos(np.clip(v[..., 2] / r, -1.0, 1.0))
    phi = np.arctan2(v[..., 1], v[..., 0])
    phi = np.where(phi >= math.pi, phi - TWO_PI, phi)
    return phi, theta


def great_circle(u, v):
    """Angle between unit vectors (stable near 0 and pi)."""
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    dot = np.sum(u * v, axis=-1)
    return np.arctan2(cross, dot)


def chart_distance(surface: SurfaceDescriptor, p, q) -> float:
    """Quotient distance between two chart points.

    Torus: Euclidean distance minimised over periodic copies. Sphere:
    great-circle distance. Rectangle: Euclidean.
    """
    return float(chart_distances(surface, np.asarray(p, float), np.asarray(q, float)))


def chart_distances(surface: SurfaceDescriptor, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Vectorised :func:`chart_distance`; ``p`` and ``q`` broadcast over ``(..., 2)``."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    if surface.kind is SurfaceKind.FLAT_TORUS:
        d = np.abs(p - q) % TWO_PI
        d = np.minimum(d, TWO_PI - d)
        return np.hypot(d[..., 0], d[..., 1])
    if surface.kind is SurfaceKind.SPHERE:
        return great_circle(sphere_to_xyz(p[..., 0], p[..., 1]), sphere_to_xyz(q[..., 0], q[..., 1]))
    return np.hypot(p[..., 0] - q[..., 0], p[..., 1] - q[..., 1])
