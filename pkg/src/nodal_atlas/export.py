"""SVG rendering of a nodal graph on its chart."""

from __future__ import annotations

import numpy as np

from .eigenfamilies import Eigenfunction
from .nodal_graph import NodalGraph, VertexClass

WIDTH = 640
SHADE_CELLS = 96
COLORS = {
    VertexClass.INTERIOR: "#d62728",
    VertexClass.BOUNDARY: "#1f77b4",
    VertexClass.CORNER: "#7f7f7f",
    VertexClass.DUMMY: "#2ca02c",
}
FACE_FILL = {1: "#fde0c5", -1: "#c6dbef"}


def _split_at_seams(points, period):
    """Break a polyline wherever consecutive points jump across a periodic seam."""
    runs = [[points[0]]]
    for p, q in zip(points, points[1:]):
        if (period[0] and abs(q[0] - p[0]) > period[0] / 2) or (period[1] and abs(q[1] - p[1]) > period[1] / 2):
            runs.append([q])
        else:
            runs[-1].append(q)
    return [r for r in runs if len(r) > 1]


def render_svg(graph: NodalGraph, u: Eigenfunction | None = None) -> str:
    """Chart rectangle, face signs (sampled from ``u``), arcs and class-coloured vertices."""
    (x0, x1), (y0, y1) = graph.surface.chart_extent
    sx = WIDTH / (x1 - x0)
    height = int(round((y1 - y0) * sx))

    def to_px(p):
        # chart y grows upward, SVG y downward
        return (p[0] - x0) * sx, height - (p[1] - y0) * sx

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{height}" fill="white" stroke="black"/>',
    ]
    if u is not None:
        hx, hy = (x1 - x0) / SHADE_CELLS, (y1 - y0) / SHADE_CELLS
        xs = x0 + (np.arange(SHADE_CELLS) + 0.5) * hx
        ys = y0 + (np.arange(SHADE_CELLS) + 0.5) * hy
        signs = np.where(u.grid_values(xs, ys) >= 0, 1, -1)
        out.append('<g stroke="none">')
        for i in range(SHADE_CELLS):
            for j in range(SHADE_CELLS):
                px, py = to_px((x0 + i * hx, y0 + (j + 1) * hy))
                out.append(f'<rect x="{px:.2f}" y="{py:.2f}" width="{hx * sx:.2f}" height="{hy * sx:.2f}" '
                           f'fill="{FACE_FILL[int(signs[i, j])]}"/>')
        out.append("</g>")
    px_, py_ = graph.surface.periodic
    per = ((x1 - x0) if px_ else 0.0, (y1 - y0) if py_ else 0.0)
    out.append('<g fill="none" stroke="black" stroke-width="1.5">')
    for e in graph.edges:
        for run in _split_at_seams(list(e.polyline), per):
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in map(to_px, run))
            out.append(f'<polyline points="{pts}"/>')
    out.append("</g>")
    for v in graph.vertices:
        px, py = to_px(v.pos)
        r = 5 if v.is_critical else 3.5
        out.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="{r}" fill="{COLORS[v.cls]}">'
                   f"<title>{v.cls.value} degree {v.degree}</title></circle>")
    out.append("</svg>")
    return "\n".join(out) + "\n"

