"""Embedded nodal graphs and their combinatorial bookkeeping.

Vertices are critical points of the eigenfunction in its nodal set, dummy
vertices placed on circle components, and (rectangle only) the four chart
corners. Edges are nodal arcs stored as chart polylines; loops are allowed
and contribute 2 to the degree of their vertex. Faces are the connected
components of the complement, each carrying a sign and the Euler
characteristic of its grid approximation.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field, replace

from .surfaces import SurfaceDescriptor


class VertexClass(str, enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    CORNER = "Corner"
    DUMMY = "Dummy"


class InconsistentGraph(RuntimeError):
    pass


@dataclass(frozen=True)
class Vertex:
    id: int
    pos: tuple[float, float]
    cls: VertexClass
    degree: int
    order: int | None = None

    @property
    def is_critical(self) -> bool:
        return self.cls in (VertexClass.INTERIOR, VertexClass.BOUNDARY)


@dataclass(frozen=True)
class Edge:
    id: int
    v_from: int
    v_to: int
    polyline: tuple[tuple[float, float], ...]
    on_boundary: bool = False

    @property
    def is_loop(self) -> bool:
        return self.v_from == self.v_to


@dataclass(frozen=True)
class Face:
    id: int
    sign: int
    area_estimate: float
    euler_char: int


@dataclass(frozen=True)
class NodalGraph:
    surface: SurfaceDescriptor
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    faces: tuple[Face, ...]
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def V(self) -> int:
        return len(self.vertices)

    @property
    def E(self) -> int:
        return len(self.edges)

    @property
    def F(self) -> int:
        return len(self.faces)

    @property
    def cellular(self) -> bool:
        """Every face is an open disc (Euler characteristic one)."""
        return bool(self.faces) and all(f.euler_char == 1 for f in self.faces)

    def critical_vertices(self) -> list[Vertex]:
        return [v for v in self.vertices if v.is_critical]

    def incidence_degrees(self) -> Counter:
        deg: Counter = Counter()
        for e in self.edges:
            deg[e.v_from] += 1
            deg[e.v_to] += 1
        return deg

    def counts(self) -> dict:
        n, c = components(self)
        return {"V": self.V, "E": self.E, "F": self.F, "n": n, "c": c}

    def to_json(self) -> dict:
        return {
            "vertices": [
                {"id": v.id, "pos": [_r(v.pos[0]), _r(v.pos[1])], "class": v.cls.value,
                 "degree": v.degree, "order": v.order}
                for v in self.vertices
            ],
            "edges": [
                {"id": e.id, "v_from": e.v_from, "v_to": e.v_to,
                 "polyline": [[_r(x), _r(y)] for x, y in e.polyline],
                 "on_boundary": e.on_boundary}
                for e in self.edges
            ],
            "faces": [
                {"id": f.id, "sign": f.sign, "area_estimate": _r(f.area_estimate)}
                for f in self.faces
            ],
            "counts": self.counts(),
        }


def _r(x: float) -> float:
    return round(float(x), 10)


class UnionFind:
    """Disjoint sets over ``0..size-1`` with path halving and union by size."""

    def __init__(self, size: int = 0):
        self.parent = list(range(size))
        self.size = [1] * size

    def add(self) -> int:
        self.parent.append(len(self.parent))
        self.size.append(1)
        return len(self.parent) - 1

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def roots(self) -> list[int]:
        return [i for i in range(len(self.parent)) if self.find(i) == i]


def components(graph: NodalGraph) -> tuple[int, int]:
    """Number of connected components and of circle components.

    A circle component is a dummy vertex carrying a single loop edge.
    """
    index = {v.id: i for i, v in enumerate(graph.vertices)}
    uf = UnionFind(len(index))
    for e in graph.edges:
        uf.union(index[e.v_from], index[e.v_to])
    n = len(uf.roots())
    loops = Counter(e.v_from for e in graph.edges if e.is_loop)
    edges_at = graph.incidence_degrees()
    c = sum(
        1 for v in graph.vertices
        if v.cls is VertexClass.DUMMY and loops[v.id] == 1 and edges_at[v.id] == 2
    )
    return n, c


def check_handshake(graph: NodalGraph) -> None:
    total = sum(v.degree for v in graph.vertices)
    if total != 2 * graph.E:
        raise InconsistentGraph(f"sum of degrees {total} != 2E = {2 * graph.E}")
    inc = graph.incidence_degrees()
    for v in graph.vertices:
        if inc[v.id] != v.degree:
            raise InconsistentGraph(f"vertex {v.id} records degree {v.degree} but has {inc[v.id]} edge ends")


def euler_slack(graph: NodalGraph, surface: SurfaceDescriptor | None = None) -> int:
    """``(V - E + F) - chi - (n - 1)``, nonnegative for embedded graphs.

    Computed on the graph as given; pass the corner-suppressed graph (see
    :func:`suppress_corners`) to get the value the bounds are stated for.
    """
    surface = surface or graph.surface
    check_handshake(graph)
    n, _ = components(graph)
    return graph.V - graph.E + graph.F - surface.euler_characteristic - (n - 1)


def degree_histogram(graph: NodalGraph) -> tuple[dict[int, int], dict[str, int]]:
    """Degrees of critical vertices, plus the split of boundary ones by degree >= 4."""
    hist = Counter(v.degree for v in graph.vertices if v.is_critical)
    bnd = [v for v in graph.vertices if v.cls is VertexClass.BOUNDARY]
    split = {
        "boundary_deg_ge4": sum(1 for v in bnd if v.degree >= 4),
        "boundary_deg_lt4": sum(1 for v in bnd if v.degree < 4),
        "interior": sum(1 for v in graph.vertices if v.cls is VertexClass.INTERIOR),
    }
    return dict(sorted(hist.items())), split


def suppress_vertices(vertices: list[Vertex], edges: list[Edge], drop: set[int]) -> tuple[list[Vertex], list[Edge]]:
    """Remove degree-2 vertices in ``drop`` by merging their two edges.

    A vertex whose two edge ends belong to one loop is turned into a dummy
    vertex instead, since the component it sits on is then a bare circle.
    Ids are left untouched; callers renumber.
    """
    vmap = {v.id: v for v in vertices}
    edges = list(edges)
    for vid in sorted(drop):
        at = [e for e in edges if vid in (e.v_from, e.v_to)]
        ends = sum((e.v_from == vid) + (e.v_to == vid) for e in at)
        if ends != 2:
            raise InconsistentGraph(f"vertex {vid} to suppress has degree {ends}, expected 2")
        if len(at) == 1:
            vmap[vid] = replace(vmap[vid], cls=VertexClass.DUMMY, order=None)
            continue
        e1, e2 = at
        p1 = e1.polyline if e1.v_to == vid else tuple(reversed(e1.polyline))
        a = e1.v_from if e1.v_to == vid else e1.v_to
        p2 = e2.polyline if e2.v_from == vid else tuple(reversed(e2.polyline))
        b = e2.v_to if e2.v_from == vid else e2.v_from
        merged = Edge(min(e1.id, e2.id), a, b, p1 + p2[1:], e1.on_boundary and e2.on_boundary)
        edges = [e for e in edges if e is not e1 and e is not e2] + [merged]
        del vmap[vid]
    return list(vmap.values()), edges


def renumber(surface: SurfaceDescriptor, vertices, edges, faces, meta=None) -> NodalGraph:
    """Assign ids in a deterministic order: vertices by position, edges by endpoints."""
    vs = sorted(vertices, key=lambda v: (round(v.pos[0], 9), round(v.pos[1], 9), v.cls.value))
    new_id = {v.id: i for i, v in enumerate(vs)}
    vs = [replace(v, id=new_id[v.id]) for v in vs]
    es = []
    for e in edges:
        a, b = new_id[e.v_from], new_id[e.v_to]
        poly = e.polyline
        if a > b:
            a, b, poly = b, a, tuple(reversed(poly))
        es.append((a, b, poly, e.on_boundary))
    es.sort(key=lambda t: (t[0], t[1], round(t[2][len(t[2]) // 2][0], 9), round(t[2][len(t[2]) // 2][1], 9)))
    es = [Edge(i, a, b, poly, ob) for i, (a, b, poly, ob) in enumerate(es)]
    return NodalGraph(surface, tuple(vs), tuple(es), tuple(faces), dict(meta or {}))


def suppress_corners(graph: NodalGraph) -> NodalGraph:
    """The graph the bounds are stated for: corner vertices merged away."""
    corners = {v.id for v in graph.vertices if v.cls is VertexClass.CORNER}
    if not corners:
        return graph
    vs, es = suppress_vertices(list(graph.vertices), list(graph.edges), corners)
    return renumber(graph.surface, vs, es, graph.faces, graph.meta)
