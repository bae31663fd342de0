"""Topological bounds on critical points in nodal sets, checked on extracted graphs.

Every bound is an inequality between small half-integers, so all arithmetic
is done with :class:`fractions.Fraction`. A bound whose hypothesis is not met
by the input yields no verdict rather than a vacuous pass.

Verdict ids
-----------
``critical_count``           ``|C_int| + |C_bd|/2 <= mu - chi - (n - 1)``
``critical_count_refined``   as above with boundary points of degree >= 4 counted fully
``order_sum``                ``sum_int G + sum_bd G/2 <= mu - chi + |C_int| + |C_bd|/2 - (n - 1)``
``cellular_count``           ``|C_int| + |C_bd|/2 <= mu - chi``
``cellular_order_sum``       ``sum_int G + sum_bd G/2 <= 2 mu - 2 chi``
``courant``                  ``mu <= k``
``index_count``              ``|C_int| + |C_bd|/2 <= k - chi``
``index_order_sum``          ``sum_int G + sum_bd G/2 <= 2 k - 2 chi``
``contour_count``            ``|C_int| <= mu - chi - q``
``contour_order_sum``        ``sum_int G <= 2 mu - 2 chi - 2 q``
``domain_count``             ``|C_int| + |C_bd|/2 <= mu + q - 2 - (n - 1)``
``domain_order_sum``         ``sum_int G + sum_bd G/2 <= 2 mu + 2 q - 4 - 2 (n - 1)``
``domain_interior_count``    ``|C_int| <= mu - 2``
``domain_interior_order_sum`` ``sum_int G <= 2 mu - 4``

Here ``G`` is the vanishing order, ``mu = F`` the number of nodal domains,
``n`` the number of components of the nodal graph and ``k`` the eigenvalue
index.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .eigenfamilies import Eigenfunction, eigenvalue_index
from .nodal_extract import GridSpec, extract_nodal_graph
from .nodal_graph import (
    NodalGraph,
    VertexClass,
    check_handshake,
    components,
    degree_histogram,
    euler_slack,
    suppress_corners,
)
from .surfaces import SurfaceDescriptor, SurfaceKind

CSV_VERSION = "nodal-atlas-verdicts/1"
VERDICT_COLUMNS = ("theorem", "lhs", "rhs", "holds", "equality", "predicted", "consistent")
HALF = Fraction(1, 2)


class HypothesisNotMet(ValueError):
    pass


@dataclass(frozen=True)
class Verdict:
    theorem: str
    lhs: Fraction
    rhs: Fraction
    equality_predicted: bool | None = None

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    @property
    def equality(self) -> bool:
        return self.lhs == self.rhs

    @property
    def slack(self) -> Fraction:
        return self.rhs - self.lhs

    @property
    def consistent(self) -> bool | None:
        if self.equality_predicted is None:
            return None
        return self.equality == self.equality_predicted

    def to_row(self) -> dict:
        return {
            "theorem": self.theorem,
            "lhs": _fmt(self.lhs),
            "rhs": _fmt(self.rhs),
            "holds": self.holds,
            "equality": self.equality,
            "predicted": self.equality_predicted,
            "consistent": self.consistent,
        }


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class CriticalRecord:
    position: tuple[float, float]
    location_class: str
    degree: int
    vanishing_order: int

    @property
    def degree_order_consistent(self) -> bool:
        if self.location_class == VertexClass.BOUNDARY.value:
            return self.degree == self.vanishing_order + 1
        return self.degree == 2 * self.vanishing_order


@dataclass(frozen=True)
class AnalysisReport:
    surface: SurfaceDescriptor
    eigenfunction: dict
    eigenvalue: float
    index: int
    V: int
    E: int
    F: int
    n: int
    c: int
    interior_count: int
    boundary_count: int
    boundary_deg_ge4: int
    boundary_deg_lt4: int
    degree_histogram: dict
    critical: tuple[CriticalRecord, ...]
    sum_order_interior: int
    sum_order_boundary: int
    euler_slack: int
    cellular: bool
    interior_nodal_set: bool
    verdicts: tuple[Verdict, ...] = ()
    graph: NodalGraph | None = field(default=None, compare=False, repr=False)

    @property
    def mu(self) -> int:
        return self.F

    @property
    def all_orders_two(self) -> bool:
        return all(c.vanishing_order == 2 for c in self.critical)

    @property
    def all_hold(self) -> bool:
        return all(v.holds for v in self.verdicts)

    def verdict(self, theorem: str) -> Verdict | None:
        for v in self.verdicts:
            if v.theorem == theorem:
                return v
        return None

    def to_json(self) -> dict:
        return {
            "surface": self.surface.to_json(),
            "eigenfunction": self.eigenfunction,
            "eigenvalue": round(self.eigenvalue, 10),
            "index": self.index,
            "counts": {"V": self.V, "E": self.E, "F": self.F, "mu": self.F, "n": self.n, "c": self.c},
            "critical_interior": self.interior_count,
            "critical_boundary": self.boundary_count,
            "boundary_deg_ge4": self.boundary_deg_ge4,
            "boundary_deg_lt4": self.boundary_deg_lt4,
            "degree_histogram": {str(k): v for k, v in self.degree_histogram.items()},
            "critical_points": [
                {"pos": [round(c.position[0], 10), round(c.position[1], 10)], "class": c.location_class,
                 "degree": c.degree, "order": c.vanishing_order}
                for c in self.critical
            ],
            "sum_order_interior": self.sum_order_interior,
            "sum_order_boundary": self.sum_order_boundary,
            "euler_slack": self.euler_slack,
            "cellular": self.cellular,
            "verdicts": [v.to_row() for v in self.verdicts],
            "all_hold": self.all_hold,
        }


def build_report(u: Eigenfunction, graph: NodalGraph) -> AnalysisReport:
    """Aggregate the counts the bounds are stated in; ``graph`` may still contain corners."""
    reduced = suppress_corners(graph)
    check_handshake(reduced)
    n, c = components(reduced)
    hist, split = degree_histogram(reduced)
    crit = tuple(
        CriticalRecord(v.pos, v.cls.value, v.degree, int(v.order))
        for v in reduced.critical_vertices()
    )
    interior = [r for r in crit if r.location_class == VertexClass.INTERIOR.value]
    boundary = [r for r in crit if r.location_class == VertexClass.BOUNDARY.value]
    report = AnalysisReport(
        surface=reduced.surface,
        eigenfunction=u.to_json(),
        eigenvalue=float(u.eigenvalue),
        index=eigenvalue_index(u),
        V=reduced.V, E=reduced.E, F=reduced.F, n=n, c=c,
        interior_count=len(interior),
        boundary_count=len(boundary),
        boundary_deg_ge4=split["boundary_deg_ge4"],
        boundary_deg_lt4=split["boundary_deg_lt4"],
        degree_histogram=hist,
        critical=crit,
        sum_order_interior=sum(r.vanishing_order for r in interior),
        sum_order_boundary=sum(r.vanishing_order for r in boundary),
        euler_slack=euler_slack(reduced),
        cellular=reduced.cellular,
        interior_nodal_set=any(not e.on_boundary for e in reduced.edges),
        graph=graph,
    )
    return report


# -- individual bounds ------------------------------------------------------


def _require_critical(report: AnalysisReport) -> None:
    if not report.critical:
        raise HypothesisNotMet("no critical point in the nodal set")


def _count(report: AnalysisReport) -> Fraction:
    return report.interior_count + HALF * report.boundary_count


def _order_sum(report: AnalysisReport) -> Fraction:
    return report.sum_order_interior + HALF * report.sum_order_boundary


def check_main1(report: AnalysisReport) -> Verdict:
    _require_critical(report)
    rhs = Fraction(report.mu - report.surface.chi - (report.n - 1))
    predicted = report.all_orders_two and report.euler_slack == 0
    return Verdict("critical_count", _count(report), rhs, predicted)


def check_main1_refined(report: AnalysisReport) -> Verdict:
    _require_critical(report)
    lhs = report.interior_count + report.boundary_deg_ge4 + HALF * report.boundary_deg_lt4
    rhs = Fraction(report.mu - report.surface.chi - (report.n - 1))
    return Verdict("critical_count_refined", Fraction(lhs), rhs, None)


def check_main2(report: AnalysisReport) -> Verdict:
    _require_critical(report)
    rhs = report.mu - report.surface.chi + _count(report) - (report.n - 1)
    return Verdict("order_sum", _order_sum(report), Fraction(rhs), report.euler_slack == 0)


def check_corollary_34(report: AnalysisReport) -> tuple[Verdict, Verdict]:
    _require_critical(report)
    chi = report.surface.chi
    predicted = report.cellular and report.all_orders_two
    return (
        Verdict("cellular_count", _count(report), Fraction(report.mu - chi), predicted),
        Verdict("cellular_order_sum", _order_sum(report), Fraction(2 * report.mu - 2 * chi), predicted),
    )


def check_courant(report: AnalysisReport) -> Verdict:
    return Verdict("courant", Fraction(report.mu), Fraction(report.index), None)


def check_corollary_35(report: AnalysisReport) -> tuple[Verdict, Verdict]:
    """Index bounds; they follow from the cellular bounds whenever ``mu <= k``."""
    _require_critical(report)
    chi, k = report.surface.chi, report.index
    return (
        Verdict("index_count", _count(report), Fraction(k - chi), None),
        Verdict("index_order_sum", _order_sum(report), Fraction(2 * k - 2 * chi), None),
    )


def check_contours(report: AnalysisReport) -> tuple[Verdict, Verdict]:
    """Interior bounds with the contour count; need nodal arcs away from the boundary."""
    if not report.interior_nodal_set:
        raise HypothesisNotMet("nodal set does not meet the interior")
    chi, q = report.surface.chi, report.surface.q
    return (
        Verdict("contour_count", Fraction(report.interior_count), Fraction(report.mu - chi - q), None),
        Verdict("contour_order_sum", Fraction(report.sum_order_interior),
                Fraction(2 * report.mu - 2 * chi - 2 * q), None),
    )


def check_domain(report: AnalysisReport) -> tuple[Verdict, Verdict]:
    if report.surface.kind is not SurfaceKind.RECTANGLE:
        raise HypothesisNotMet("planar domain bounds apply to the rectangle only")
    q, n = report.surface.q, report.n
    predicted = report.all_orders_two and report.euler_slack == 0
    return (
        Verdict("domain_count", _count(report), Fraction(report.mu + q - 2 - (n - 1)), predicted),
        Verdict("domain_order_sum", _order_sum(report), Fraction(2 * report.mu + 2 * q - 4 - 2 * (n - 1)), predicted),
    )


def check_corollary_411(report: AnalysisReport) -> tuple[Verdict, Verdict]:
    if report.surface.kind is not SurfaceKind.RECTANGLE:
        raise HypothesisNotMet("planar domain bounds apply to the rectangle only")
    if not report.interior_nodal_set:
        raise HypothesisNotMet("nodal set does not meet the interior")
    return (
        Verdict("domain_interior_count", Fraction(report.interior_count), Fraction(report.mu - 2), None),
        Verdict("domain_interior_order_sum", Fraction(report.sum_order_interior), Fraction(2 * report.mu - 4), None),
    )


CHECKS = (
    check_main1,
    check_main1_refined,
    check_main2,
    check_corollary_34,
    check_courant,
    check_corollary_35,
    check_contours,
    check_domain,
    check_corollary_411,
)


def evaluate(report: AnalysisReport) -> AnalysisReport:
    """Attach every verdict whose hypothesis holds."""
    out: list[Verdict] = []
    for check in CHECKS:
        try:
            res = check(report)
        except HypothesisNotMet:
            continue
        out.extend(res if isinstance(res, tuple) else (res,))
    return replace(report, verdicts=tuple(out))


def analyze(u: Eigenfunction, grid: GridSpec | None = None) -> AnalysisReport:
    """Extract the nodal graph of ``u`` and evaluate all applicable bounds."""
    graph = extract_nodal_graph(u, grid=grid)
    return evaluate(build_report(u, graph))


def verdicts_csv(verdicts, prefix_columns: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    extra = list(prefix_columns or {})
    w = csv.DictWriter(buf, fieldnames=extra + list(VERDICT_COLUMNS), lineterminator="\n")
    w.writeheader()
    for v in verdicts:
        w.writerow({**(prefix_columns or {}), **v.to_row()})
    return buf.getvalue()
