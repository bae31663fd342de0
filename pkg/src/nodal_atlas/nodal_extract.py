"""From an eigenfunction to its nodal graph.

Pipeline, in order:

1. sample ``u`` on a cell-centred grid (seams wrap where the chart does);
2. locate critical points of ``u`` lying in the nodal set, refine them and
   measure their vanishing order and arc degree;
3. marching squares on the sign grid: roots on grid edges by bisection,
   linked cell by cell into chains; cells near a vertex are cut out so that
   every chain ending there attaches to that vertex;
4. open chains become edges, closed chains become circle components with one
   dummy vertex each, the rectangle boundary is split into edges between its
   boundary vertices and corners;
5. faces are 4-connected sign components of the grid with small discs around
   critical points removed; each face also gets the Euler characteristic of
   its cubical approximation, which decides cellularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.ndimage
import scipy.optimize

from .eigenfamilies import Eigenfunction, derivative_profile
from .nodal_graph import (
    Edge,
    Face,
    NodalGraph,
    UnionFind,
    Vertex,
    VertexClass,
    renumber,
    suppress_vertices,
)
from .surfaces import SurfaceDescriptor, SurfaceKind, chart_distances, wrap_point

ORDER_CAP = 16
ORDER_TOLERANCE = 1e-7
GRID_OFFSET = 0.5 + 0.01 * math.sqrt(2.0)  # irrational: keeps rational zero lines off grid nodes


class ExtractionError(RuntimeError):
    """Nodal topology could not be resolved at the requested resolution."""

    def __init__(self, message: str, location=None):
        super().__init__(message if location is None else f"{message} at {tuple(round(c, 6) for c in location)}")
        self.location = location


class InvalidInput(ValueError):
    pass


class UnresolvedOrder(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    resolution: int = 512
    eps_root: float = 1e-10
    eps_grad: float = 1e-8
    eps_val: float = 1e-8
    snap_cells: float = 2.0  # snapping radius in cell diagonals

    def __post_init__(self):
        if self.resolution < 16:
            raise ValueError("grid resolution must be at least 16")
        if min(self.eps_root, self.eps_grad, self.eps_val, self.snap_cells) <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class CriticalPoint:
    position: tuple[float, float]
    location_class: VertexClass
    degree: int
    vanishing_order: int


@dataclass
class _Grid:
    xs: np.ndarray
    ys: np.ndarray
    hx: float
    hy: float
    periodic: tuple[bool, bool]
    diag: float  # cell diagonal in chart distance units (largest over the grid)

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)


def _make_grid(surface: SurfaceDescriptor, n: int) -> _Grid:
    (x0, x1), (y0, y1) = surface.chart_extent
    hx, hy = (x1 - x0) / n, (y1 - y0) / n
    xs = x0 + (np.arange(n) + GRID_OFFSET) * hx
    ys = y0 + (np.arange(n) + GRID_OFFSET) * hy
    return _Grid(xs, ys, hx, hy, surface.periodic, math.hypot(hx, hy))


# -- vanishing order and local degree -------------------------------------------


def vanishing_order(u: Eigenfunction, z, eps_val: float = 1e-8) -> int:
    """Order of the first nonvanishing derivative of ``u`` at ``z``.

    Scans total orders 1, 2, ... and returns the first whose largest partial
    exceeds ``1e-7`` of its Bernstein scale ``sup|u| lambda^{k/2}``.
    """
    prof = derivative_profile(u, z, ORDER_CAP)
    if prof[0] > max(eps_val, ORDER_TOLERANCE):
        raise ValueError(f"point {tuple(z)} is not in the nodal set (|u|/sup = {prof[0]:.3g})")
    hits = np.flatnonzero(prof[1:] > ORDER_TOLERANCE)
    if hits.size == 0:
        raise UnresolvedOrder(f"no nonvanishing derivative up to order {ORDER_CAP} at {tuple(z)}")
    return int(hits[0]) + 1


def _sign_changes(vals: np.ndarray, closed: bool) -> int:
    s = vals >= 0
    if closed:
        return int(np.count_nonzero(s != np.roll(s, 1)))
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _inward_normal(surface: SurfaceDescriptor, z) -> tuple[float, float]:
    (x0, x1), (y0, y1) = surface.chart_extent
    x, y = z
    d = [(abs(y - y0), (0.0, 1.0)), (abs(x - x1), (-1.0, 0.0)), (abs(y - y1), (0.0, -1.0)), (abs(x - x0), (1.0, 0.0))]
    return min(d)[1]


def local_degree(u: Eigenfunction, z, radius: float, boundary: bool = False, samples: int = 2048) -> int:
    """Number of nodal arcs leaving ``z``, from sign changes on a small circle.

    Boundary points use the half circle pointing into the domain and add the
    two boundary arcs.
    """
    surface = u.surface
    if boundary:
        nx, ny = _inward_normal(surface, z)
        t = np.linspace(0.0, math.pi, samples + 2)[1:-1] - math.pi / 2
        dx = radius * (nx * np.cos(t) - ny * np.sin(t))
        dy = radius * (ny * np.cos(t) + nx * np.sin(t))
        vals = u.value(z[0] + dx, z[1] + dy)
        return _sign_changes(vals, closed=False) + 2
    t = np.linspace(0.0, 2 * math.pi, samples, endpoint=False)
    vals = u.value(*u.circle_points(z, radius, t))
    return _sign_changes(vals, closed=True)


def taylor_arc_count(u: Eigenfunction, z, order: int, samples: int = 4096) -> int:
    """Arcs at ``z`` from the Taylor polynomial with all orders below ``order`` dropped.

    For high vanishing order, rounding in the lower coefficients swamps
    ``u`` on any circle small enough to isolate ``z``; once those orders are
    known to vanish they can be removed and the remaining series sampled on
    a circle of radius ``0.05 / sqrt(lambda)``.
    """
    c = u.taylor(z, ORDER_CAP)
    for k in range(min(order, ORDER_CAP + 1)):
        for a in range(k + 1):
            c[a, k - a] = 0.0
    r = 0.05 / math.sqrt(max(u.eigenvalue, 1.0))
    t = np.linspace(0.0, 2 * math.pi, samples, endpoint=False)
    x, y = r * np.cos(t), r * np.sin(t)
    vals = np.polynomial.polynomial.polyval2d(x, y, c)
    return _sign_changes(vals, closed=True)


# -- critical point refinement ----------------------------------------------------------


def _gauss_newton_stage(u: Eigenfunction, z, g: int, max_step: float, iters: int = 60):
    """Drive all derivatives of total order ``g - 1`` to zero, starting at ``z``."""
    z = tuple(z)
    for _ in range(iters):
        c = u.taylor(z, g)
        rows, jac = [], []
        for a in range(g - 1, -1, -1):
            b = g - 1 - a
            fa, fb = math.factorial(a), math.factorial(b)
            rows.append(c[a, b] * fa * fb)
            jac.append([c[a + 1, b] * math.factorial(a + 1) * fb, c[a, b + 1] * fa * math.factorial(b + 1)])
        F = np.array(rows)
        J = np.array(jac)
        step, *_ = np.linalg.lstsq(J, -F, rcond=1e-12)
        norm = float(np.hypot(*step))
        if not np.all(np.isfinite(step)):
            break
        if norm > max_step:
            step *= max_step / norm
        z = u.local_to_chart(z, step)
        if norm < 1e-15:
            break
    return z


def _refine_critical(u: Eigenfunction, z0, h: float):
    """Newton on the gradient, then deflated stages for higher vanishing order.

    Returns ``(z, profile)`` at the best point found.
    """
    z = _gauss_newton_stage(u, z0, 2, max_step=h)
    prof = derivative_profile(u, z, ORDER_CAP)
    if prof[0] > 1e-6 or prof[1] > 1e-6:
        # Newton wandered or stalled: minimise u^2 + |grad u|^2 near the start
        def obj(d):
            c = u.taylor(u.local_to_chart(z0, d), 1)
            return c[0, 0] ** 2 + c[1, 0] ** 2 + c[0, 1] ** 2

        res = scipy.optimize.minimize(obj, x0=np.zeros(2), method="Nelder-Mead",
                                      options={"xatol": 1e-14, "fatol": 1e-30, "maxiter": 4000})
        if np.hypot(*res.x) <= 2 * h:
            z2 = u.local_to_chart(z0, res.x)
            prof2 = derivative_profile(u, z2, ORDER_CAP)
            if prof2[0] + prof2[1] < prof[0] + prof[1]:
                z, prof = z2, prof2
    if prof[0] > 1e-6:
        return z, prof
    g = 3
    while g <= ORDER_CAP and np.all(prof[1:g - 1] <= ORDER_TOLERANCE):
        z_next = _gauss_newton_stage(u, z, g, max_step=h / 4)
        prof_next = derivative_profile(u, z_next, ORDER_CAP)
        moved = float(chart_distances(u.surface, np.array(z), np.array(z_next)))
        if moved > h or not np.all(prof_next[: g] <= ORDER_TOLERANCE):
            break
        z, prof = z_next, prof_next
        g += 1
    return z, prof


def _cell_candidates(u: Eigenfunction, grid: _Grid, U: np.ndarray, sup: float) -> list[tuple[float, float]]:
    gx, gy = u.grid_gradient(grid.xs, grid.ys)
    px, py = grid.periodic

    def corners(A):
        c0 = A
        c1 = np.roll(A, -1, axis=0)
        c2 = np.roll(c1, -1, axis=1)
        c3 = np.roll(A, -1, axis=1)
        stack = np.stack([c0, c1, c2, c3])
        if not px:
            stack = stack[:, :-1, :]
        if not py:
            stack = stack[:, :, :-1]
        return stack

    GX, GY, UU = corners(gx), corners(gy), corners(U)
    changes = (
        (GX.min(0) <= 0) & (GX.max(0) >= 0) & (GY.min(0) <= 0) & (GY.max(0) >= 0)
    )
    lam = max(u.eigenvalue, 1.0)
    small = np.abs(UU).min(0) <= 4.0 * grid.diag ** 2 * lam * sup
    ii, jj = np.nonzero(changes & small)
    cx = grid.xs[ii] + 0.5 * grid.hx
    cy = grid.ys[jj] + 0.5 * grid.hy
    return [(float(a), float(b)) for a, b in zip(cx, cy)]


@dataclass
class _Located:
    pos: tuple[float, float]
    cls: VertexClass
    order: int
    degree: int = 0
    radius: float = 0.0


def _locate(u: Eigenfunction, grid: _Grid, gs: GridSpec, U: np.ndarray, sup: float) -> list[_Located]:
    """All points that become graph vertices: critical points plus nodal poles of order one."""
    surface = u.surface
    kind = surface.kind
    r_snap = gs.snap_cells * grid.diag
    lam = max(u.eigenvalue, 1.0)
    found: list[_Located] = []

    def near_existing(p) -> bool:
        if not found:
            return False
        d = chart_distances(surface, np.array([f.pos for f in found]), np.asarray(p, float))
        return bool(np.min(d) < r_snap)

    # poles are handled in the orthographic chart
    if kind is SurfaceKind.SPHERE:
        for theta in (0.0, math.pi):
            prof = derivative_profile(u, (0.0, theta), ORDER_CAP)
            if prof[0] <= gs.eps_val:
                order = vanishing_order(u, (0.0, theta), gs.eps_val)
                cls = VertexClass.INTERIOR if order >= 2 else VertexClass.DUMMY
                found.append(_Located((0.0, theta), cls, order))

    if kind is SurfaceKind.RECTANGLE:
        found.extend(_boundary_critical(u, grid, gs, r_snap))

    for z0 in _cell_candidates(u, grid, U, sup):
        if kind is SurfaceKind.SPHERE and min(z0[1], math.pi - z0[1]) < 4 * r_snap:
            continue
        z, prof = _refine_critical(u, z0, grid.h)
        z = wrap_point(surface, z)
        if kind is SurfaceKind.RECTANGLE:
            (x0, x1), (y0, y1) = surface.chart_extent
            if min(z[0] - x0, x1 - z[0], z[1] - y0, y1 - z[1]) < r_snap:
                continue
        if kind is SurfaceKind.SPHERE and min(z[1], math.pi - z[1]) < 2 * r_snap:
            continue
        if prof[0] > gs.eps_val:
            if prof[1] <= gs.eps_grad:
                _check_resolved_saddle(u, z, grid, sup)
            continue
        if prof[1] > gs.eps_grad:
            continue
        if near_existing(z):
            continue
        order = vanishing_order(u, z, gs.eps_val)
        found.append(_Located(z, VertexClass.INTERIOR, order))
    return found


def _check_resolved_saddle(u: Eigenfunction, z, grid: _Grid, sup: float) -> None:
    """A gradient zero just off the nodal set pinches two nodal branches together;
    refuse when both branches could cross a single grid edge."""
    c = u.taylor(z, 2)
    H = np.array([[2 * c[2, 0], c[1, 1]], [c[1, 1], 2 * c[0, 2]]])
    eig = np.linalg.eigvalsh(H)
    # branches open along the curvature of sign opposite to u
    across = eig[eig * c[0, 0] < 0]
    if across.size == 0:
        return
    gap = 2.0 * math.sqrt(2.0 * abs(c[0, 0]) / float(np.max(np.abs(across))))
    if gap < grid.h:
        raise ExtractionError("near-degenerate saddle: nodal branches closer than the grid resolves", z)


def _boundary_critical(u: Eigenfunction, grid: _Grid, gs: GridSpec, r_snap: float) -> list[_Located]:
    """Zeros of the normal derivative along the four sides of the rectangle."""
    (x0, x1), (y0, y1) = u.surface.chart_extent
    sides = [
        ("x", y0, grid.xs, (x0, x1)),
        ("x", y1, grid.xs, (x0, x1)),
        ("y", x0, grid.ys, (y0, y1)),
        ("y", x1, grid.ys, (y0, y1)),
    ]
    out = []
    for along, fixed, ts, (t0, t1) in sides:
        def normal_derivative(t, along=along, fixed=fixed):
            p = (t, fixed) if along == "x" else (fixed, t)
            c = u.taylor(p, 1)
            return c[0, 1] if along == "x" else c[1, 0]

        vals = np.array([normal_derivative(t) for t in ts])
        s = vals >= 0
        for i in np.flatnonzero(s[1:] != s[:-1]):
            t = scipy.optimize.brentq(normal_derivative, ts[i], ts[i + 1], xtol=1e-14, rtol=1e-15)
            if min(t - t0, t1 - t) < r_snap:
                continue
            p = (t, fixed) if along == "x" else (fixed, t)
            order = vanishing_order(u, p, gs.eps_val)
            out.append(_Located((float(p[0]), float(p[1])), VertexClass.BOUNDARY, order))
    return out


def _assign_radii_and_degrees(u: Eigenfunction, grid: _Grid, gs: GridSpec, located: list[_Located]) -> None:
    surface = u.surface
    r_snap = gs.snap_cells * grid.diag
    pts = np.array([l.pos for l in located], dtype=float).reshape(-1, 2)
    for i, l in enumerate(located):
        r = max(r_snap, 1.25 * grid.h * l.order)
        if len(located) > 1:
            d = chart_distances(surface, pts, np.asarray(l.pos))
            d[i] = np.inf
            r = min(r, 0.4 * float(np.min(d)))
        l.radius = r
        l.degree = local_degree(u, l.pos, r, boundary=l.cls is VertexClass.BOUNDARY)


def detect_critical_points(u: Eigenfunction, surface: SurfaceDescriptor | None = None,
                           grid: GridSpec | None = None) -> list[CriticalPoint]:
    """Critical points of ``u`` in its nodal set, with degree and vanishing order."""
    gs = grid or GridSpec()
    g = _make_grid(surface or u.surface, gs.resolution)
    U = u.grid_values(g.xs, g.ys)
    sup = max(float(np.max(np.abs(U))), 1e-300)
    located = [l for l in _locate(u, g, gs, U, sup)]
    _assign_radii_and_degrees(u, g, gs, located)
    return sorted(
        (CriticalPoint(l.pos, l.cls, l.degree, l.order) for l in located if l.order >= 2),
        key=lambda c: (round(c.position[0], 9), round(c.position[1], 9)),
    )


# -- marching squares -------------------------------------------------------------


def _edge_roots(u: Eigenfunction, grid: _Grid, S: np.ndarray, axis: int, iters: int):
    """Bisection roots on grid edges along ``axis`` whose end signs differ."""
    nbr = np.roll(S, -1, axis=axis)
    mask = S != nbr
    if not grid.periodic[axis]:
        if axis == 0:
            mask[-1, :] = False
        else:
            mask[:, -1] = False
    ii, jj = np.nonzero(mask)
    x = grid.xs[ii]
    y = grid.ys[jj]
    lo = np.zeros(len(ii))
    hi = np.ones(len(ii))
    s_lo = S[ii, jj]
    step = grid.hx if axis == 0 else grid.hy
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if axis == 0:
            val = u.value(x + mid * step, y)
        else:
            val = u.value(x, y + mid * step)
        same = (val >= 0) == s_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    t = 0.5 * (lo + hi)
    if axis == 0:
        pts = np.stack([x + t * step, y], axis=1)
    else:
        pts = np.stack([x, y + t * step], axis=1)
    ids = -np.ones(S.shape, dtype=np.int64)
    return ii, jj, pts, mask, ids


def _march(u: Eigenfunction, grid: _Grid, gs: GridSpec, U: np.ndarray, sup: float,
           located: list[_Located]):
    """Chains of nodal points outside the vertex discs.

    Returns ``(points, chains, ends)``: ``chains`` lists root-index sequences
    (closed ones repeat nothing and are flagged), ``ends`` maps a chain end
    to the vertex index it attaches to.
    """
    surface = u.surface
    S = U >= 0
    nx, ny = S.shape
    iters = max(30, int(math.ceil(math.log2(grid.h / gs.eps_root))) + 2)
    xi, xj, xpts, _, xid = _edge_roots(u, grid, S, 0, iters)
    yi, yj, ypts, _, yid = _edge_roots(u, grid, S, 1, iters)
    xid[xi, xj] = np.arange(len(xi))
    yid[yi, yj] = np.arange(len(yi)) + len(xi)
    points = np.concatenate([xpts.reshape(-1, 2), ypts.reshape(-1, 2)])

    ncx = nx if grid.periodic[0] else nx - 1
    ncy = ny if grid.periodic[1] else ny - 1
    cx = grid.xs[:ncx] + 0.5 * grid.hx
    cy = grid.ys[:ncy] + 0.5 * grid.hy
    CX, CY = np.meshgrid(cx, cy, indexing="ij")
    centers = np.stack([CX, CY], axis=-1)
    excised = -np.ones((ncx, ncy), dtype=np.int64)
    best = np.full((ncx, ncy), np.inf)
    for k, l in enumerate(located):
        d = chart_distances(surface, centers, np.asarray(l.pos))
        if surface.kind is SurfaceKind.SPHERE and l.pos[1] in (0.0, math.pi):
            d = np.abs(CY - l.pos[1])
        hit = (d < l.radius) & (d < best)
        excised[hit] = k
        best = np.where(hit, d, best)

    def cell_edges(i, j):
        i1 = (i + 1) % nx
        j1 = (j + 1) % ny
        return (xid[i, j], yid[i1, j], xid[i, j1], yid[i, j])

    links: dict[int, list[int]] = {}
    touching: dict[int, list[tuple[int, int]]] = {}

    # every root lies on the boundary of one or two cells
    def add_touch(r, i, j):
        touching.setdefault(r, []).append((i, j))

    count = np.zeros((ncx, ncy), dtype=np.int8)
    for arr_i, arr_j, ids, axis in ((xi, xj, xid, 0), (yi, yj, yid, 1)):
        for i, j in zip(arr_i, arr_j):
            r = int(ids[i, j])
            if axis == 0:
                cand = [(i, j), (i, (j - 1) % ny)]
                valid = [(a, b) for a, b in cand if a < ncx and (b < ncy) and (grid.periodic[1] or b <= j)]
            else:
                cand = [(i, j), ((i - 1) % nx, j)]
                valid = [(a, b) for a, b in cand if a < ncx and b < ncy and (grid.periodic[0] or a <= i)]
            for a, b in valid:
                add_touch(r, a, b)
                count[a, b] += 1

    for i, j in zip(*np.nonzero(count)):
        if excised[i, j] >= 0:
            continue
        e = cell_edges(i, j)
        present = [r for r in e if r >= 0]
        if len(present) == 2:
            pairs = [tuple(present)]
        elif len(present) == 4:
            center_val = float(u.value(cx[i], cy[j]))
            if abs(center_val) <= gs.eps_val * sup:
                raise ExtractionError("ambiguous saddle cell", (cx[i], cy[j]))
            s0 = bool(S[i, j])
            if (center_val >= 0) == s0:
                pairs = [(e[0], e[1]), (e[2], e[3])]
            else:
                pairs = [(e[0], e[3]), (e[1], e[2])]
        else:
            raise ExtractionError("odd number of sign changes in a cell", (cx[i], cy[j]))
        for a, b in pairs:
            links.setdefault(int(a), []).append(int(b))
            links.setdefault(int(b), []).append(int(a))

    # attach chain ends
    loc_pts = np.array([l.pos for l in located], dtype=float).reshape(-1, 2)
    ends: dict[int, int] = {}
    for r, nb in links.items():
        if len(nb) != 1:
            continue
        cells = touching.get(r, [])
        target = -1
        for a, b in cells:
            if excised[a, b] >= 0:
                target = int(excised[a, b])
        if target < 0:
            if len(cells) == 2 or not located:
                raise ExtractionError("nodal arc ends away from any vertex", points[r])
            d = chart_distances(surface, loc_pts, points[r])
            k = int(np.argmin(d))
            if d[k] > located[k].radius + 2 * grid.diag:
                raise ExtractionError("nodal arc reaches the chart boundary away from any vertex", points[r])
            target = k
        ends[r] = target

    chains: list[tuple[list[int], bool]] = []
    seen: set[int] = set()
    for start in sorted(ends):
        if start in seen:
            continue
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [b for b in links[cur] if b != prev or links[cur].count(b) > 1]
            nxt = [b for b in nxt if b not in seen]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            seen.add(cur)
            chain.append(cur)
        if chain[-1] not in ends:
            raise ExtractionError("open nodal chain without an end vertex", points[chain[-1]])
        chains.append((chain, False))
    for start in sorted(links):
        if start in seen:
            continue
        chain = [start]
        seen.add(start)
        cur = start
        while True:
            nxt = [b for b in links[cur] if b not in seen]
            if not nxt:
                break
            cur = nxt[0]
            seen.add(cur)
            chain.append(cur)
        chains.append((chain, True))
    return points, chains, ends


# -- faces ------------------------------------------------------------------------------


def _faces(u: Eigenfunction, grid: _Grid, U: np.ndarray, located: list[_Located], gs: GridSpec):
    surface = u.surface
    S = U >= 0
    nx, ny = S.shape
    XS, YS = np.meshgrid(grid.xs, grid.ys, indexing="ij")
    nodes = np.stack([XS, YS], axis=-1)
    blocked = np.zeros(S.shape, dtype=bool)
    for l in located:
        if l.cls is VertexClass.DUMMY:
            continue
        r = max(l.radius, gs.snap_cells * grid.diag)
        if surface.kind is SurfaceKind.SPHERE and l.pos[1] in (0.0, math.pi):
            blocked |= np.abs(YS - l.pos[1]) < r
        else:
            blocked |= chart_distances(surface, nodes, np.asarray(l.pos)) < r

    structure = scipy.ndimage.generate_binary_structure(2, 1)
    lab_pos, npos = scipy.ndimage.label(S & ~blocked, structure)
    lab_neg, nneg = scipy.ndimage.label(~S & ~blocked, structure)
    label = np.where(lab_pos > 0, lab_pos - 1, np.where(lab_neg > 0, lab_neg - 1 + npos, -1))
    total = npos + nneg
    uf = UnionFind(total)
    if grid.periodic[0]:
        a, b = label[0, :], label[-1, :]
        for p, q in zip(a[(a >= 0) & (b >= 0)], b[(a >= 0) & (b >= 0)]):
            if (p < npos) == (q < npos):
                uf.union(int(p), int(q))
    if grid.periodic[1]:
        a, b = label[:, 0], label[:, -1]
        for p, q in zip(a[(a >= 0) & (b >= 0)], b[(a >= 0) & (b >= 0)]):
            if (p < npos) == (q < npos):
                uf.union(int(p), int(q))

    # sphere: glue the first/last theta rows through a pole that carries a sign
    pole_rows = []
    if surface.kind is SurfaceKind.SPHERE:
        for row, theta in ((0, 0.0), (ny - 1, math.pi)):
            if abs(float(u.value(0.0, theta))) > gs.eps_val * u.sup_bound():
                labs = label[:, row]
                labs = labs[labs >= 0]
                for p in labs[1:]:
                    if (p < npos) == (labs[0] < npos):
                        uf.union(int(labs[0]), int(p))
                pole_rows.append(row)

    roots = sorted({uf.find(i) for i in range(total)})
    face_of = {r: k for k, r in enumerate(roots)}
    remap = np.array([face_of[uf.find(i)] for i in range(total)], dtype=np.int64)
    F = np.where(label >= 0, remap[np.clip(label, 0, None)], -1)
    nf = len(roots)

    # Euler characteristic of each face's cubical complex
    def count_pairs(A, B):
        same = (A == B) & (A >= 0)
        return np.bincount(A[same], minlength=nf)

    V = np.bincount(F[F >= 0], minlength=nf)
    Fx = np.roll(F, -1, axis=0)
    Fy = np.roll(F, -1, axis=1)
    if not grid.periodic[0]:
        Fx = Fx.copy()
        Fx[-1, :] = -2
    if not grid.periodic[1]:
        Fy = Fy.copy()
        Fy[:, -1] = -2
    E = count_pairs(F, Fx) + count_pairs(F, Fy)
    Fxy = np.roll(Fx, -1, axis=1)
    if not grid.periodic[1]:
        Fxy = Fxy.copy()
        Fxy[:, -1] = -2
    sq = (F == Fx) & (F == Fy) & (F == Fxy) & (F >= 0)
    C = np.bincount(F[sq], minlength=nf)
    chi = V - E + C
    for row in pole_rows:
        ring = F[:, row]
        nxt = np.roll(ring, -1)
        for f in np.unique(ring[ring >= 0]):
            spokes = np.count_nonzero(ring == f)
            tri = np.count_nonzero((ring == f) & (nxt == f))
            chi[f] += 1 - spokes + tri

    if surface.kind is SurfaceKind.SPHERE:
        weights = np.sin(YS) * grid.hx * grid.hy
    else:
        weights = np.full(S.shape, grid.hx * grid.hy)
    area = np.bincount(F[F >= 0], weights=weights[F >= 0], minlength=nf)
    faces = []
    for k in range(nf):
        members = np.flatnonzero(remap == k)
        sign = 1 if members[0] < npos else -1
        faces.append(Face(k, sign, float(area[k]), int(chi[k])))
    return faces, F


# -- the pipeline ---------------------------------------------------------------------------


def extract_nodal_graph(u: Eigenfunction, surface: SurfaceDescriptor | None = None,
                        grid: GridSpec | None = None) -> NodalGraph:
    """Nodal graph of ``u`` with corners kept as degree-2 vertices (rectangle).

    Use :func:`nodal_atlas.nodal_graph.suppress_corners` for the counts the
    bounds are stated in.
    """
    surface = surface or u.surface
    gs = grid or GridSpec()
    g = _make_grid(surface, gs.resolution)
    U = u.grid_values(g.xs, g.ys)
    sup = float(np.max(np.abs(U)))
    if not np.isfinite(sup) or sup <= 1e-12 * u.sup_bound():
        raise InvalidInput("eigenfunction is numerically zero on the grid")

    located = _locate(u, g, gs, U, sup)
    _assign_radii_and_degrees(u, g, gs, located)
    points, chains, ends = _march(u, g, gs, U, sup, located)

    vertices: list[Vertex] = []
    edges: list[Edge] = []
    vid_of = {}
    for k, l in enumerate(located):
        vid_of[k] = k
        vertices.append(Vertex(k, l.pos, l.cls, 0, l.order))
    next_vid = len(vertices)

    def pt(r):
        return wrap_point(surface, points[r])

    for chain, closed in chains:
        poly = tuple(pt(r) for r in chain)
        if closed:
            start = min(range(len(poly)), key=lambda i: (round(poly[i][0], 9), round(poly[i][1], 9)))
            poly = poly[start:] + poly[:start] + (poly[start],)
            vertices.append(Vertex(next_vid, poly[0], VertexClass.DUMMY, 2, None))
            edges.append(Edge(len(edges), next_vid, next_vid, poly))
            next_vid += 1
            continue
        a = ends[chain[0]]
        b = ends[chain[-1]]
        poly = (located[a].pos,) + poly + (located[b].pos,)
        edges.append(Edge(len(edges), a, b, poly))

    if surface.kind is SurfaceKind.RECTANGLE:
        next_vid = _add_boundary(surface, located, vertices, edges, next_vid)

    # order-one nodal poles are not vertices: merge their two arcs
    pass_through = {k for k, l in enumerate(located) if l.cls is VertexClass.DUMMY}
    deg = {v.id: 0 for v in vertices}
    for e in edges:
        deg[e.v_from] += 1
        deg[e.v_to] += 1
    for k, l in enumerate(located):
        expected = l.degree
        if deg[k] != expected:
            raise ExtractionError(
                f"vertex degree mismatch: {deg[k]} arcs attached, {expected} seen on the local circle", l.pos)
    vertices = [Vertex(v.id, v.pos, v.cls, deg[v.id], v.order) for v in vertices]
    if pass_through:
        vertices, edges = suppress_vertices(vertices, edges, pass_through)
        vertices = [
            Vertex(v.id, v.pos, v.cls, v.degree, None if v.cls is VertexClass.DUMMY else v.order)
            for v in vertices
        ]

    for v in vertices:
        if v.cls is VertexClass.INTERIOR and (v.degree % 2 or v.degree < 4):
            raise ExtractionError(f"interior critical point with degree {v.degree}", v.pos)
        if v.cls is VertexClass.BOUNDARY and v.degree < 3:
            raise ExtractionError(f"boundary critical point with degree {v.degree}", v.pos)

    faces, _ = _faces(u, g, U, located, gs)
    meta = {"resolution": gs.resolution, "sup_grid": sup}
    return renumber(surface, vertices, edges, faces, meta)


def _add_boundary(surface, located, vertices, edges, next_vid) -> int:
    (x0, x1), (y0, y1) = surface.chart_extent
    a, b = x1 - x0, y1 - y0

    def perimeter(p):
        x, y = p
        if abs(y - y0) < 1e-12:
            return x - x0
        if abs(x - x1) < 1e-12:
            return a + (y - y0)
        if abs(y - y1) < 1e-12:
            return a + b + (x1 - x)
        return 2 * a + b + (y1 - y)

    ring = [(perimeter(l.pos), k, l.pos) for k, l in enumerate(located) if l.cls is VertexClass.BOUNDARY]
    for corner in ((x0, y0), (x1, y0), (x1, y1), (x0, y1)):
        vertices.append(Vertex(next_vid, corner, VertexClass.CORNER, 0, None))
        ring.append((perimeter(corner), next_vid, corner))
        next_vid += 1
    ring.sort()
    for i in range(len(ring)):
        _, va, pa = ring[i]
        _, vb, pb = ring[(i + 1) % len(ring)]
        edges.append(Edge(len(edges), va, vb, (pa, pb), on_boundary=True))
    return next_vid
