"""Command-line front end.

Exit codes: 0 every verdict holds, 1 usage error, 2 extraction failure,
3 at least one verdict violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

from . import __version__
from .eigenfamilies import Eigenfunction, product_mode, rectangle_mode, sphere_harmonic, torus_eigenfunction
from .export import render_svg
from .lattice import construct_high_vanishing, factorize, r2_bruteforce, r2_formula, BRUTEFORCE_LIMIT
from .nodal_extract import ExtractionError, GridSpec, InvalidInput, extract_nodal_graph
from .nodal_graph import suppress_corners
from .sweep import (
    RANDOM_SHELLS,
    SweepItem,
    random_items,
    rectangle_catalog,
    run_sweep,
    sphere_catalog,
    torus_catalog,
    worker_count,
)
from .theorem_verify import CSV_VERSION, analyze, verdicts_csv

EXIT_OK, EXIT_USAGE, EXIT_EXTRACTION, EXIT_VIOLATION = 0, 1, 2, 3
SWEEP_CSV_VERSION = "nodal-atlas-sweep/1"
SWEEP_COLUMNS = ("label", "seed", "V", "E", "F", "n", "c", "critical_interior", "critical_boundary",
                 "euler_slack", "cellular", "all_hold", "error")
THEOREM_ORDER = ("critical_count", "critical_count_refined", "order_sum", "cellular_count",
                 "cellular_order_sum", "courant", "index_count", "index_order_sum", "contour_count",
                 "contour_order_sum", "domain_count", "domain_order_sum", "domain_interior_count",
                 "domain_interior_order_sum")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    surface: str | None = None
    product: tuple[int, int] | None = None
    modes: str | None = None
    ell: int | None = None
    m: int | None = None
    jk: tuple[int, int] | None = None
    grid: int | None = None
    seed: int | None = None
    out: str | None = None
    format: str = "json"
    n: int | None = None
    five_power_shell: bool = False
    shells: list[int] = field(default_factory=list)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nodal-atlas", description="Critical points in nodal sets of Laplace eigenfunctions.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=["analyze", "sweep", "construct", "r2", "export-svg"])
    p.add_argument("--surface", choices=["torus", "sphere", "rectangle"])
    p.add_argument("--product", nargs=2, type=int, metavar=("L1", "L2"))
    p.add_argument("--modes", metavar="FILE", help="JSON list of {l: [l1, l2], re, im}")
    p.add_argument("--ell", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--jk", nargs=2, type=int, metavar=("J", "K"))
    p.add_argument("--grid", type=int, metavar="N")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", choices=["json", "csv", "svg"], default="json")
    p.add_argument("--n", type=int)
    p.add_argument("--paper-lambda", dest="five_power_shell", action="store_true",
                   help="use the shell lambda = 5^C instead of the smallest admissible one")
    p.add_argument("--shell", type=int, action="append", dest="shells", default=[],
                   metavar="LAMBDA", help="torus shell for random sweeps (repeatable)")
    return p


def parse_config(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    return RunConfig(
        command=ns.command, surface=ns.surface,
        product=tuple(ns.product) if ns.product else None, modes=ns.modes,
        ell=ns.ell, m=ns.m, jk=tuple(ns.jk) if ns.jk else None, grid=ns.grid, seed=ns.seed,
        out=ns.out, format=ns.format, n=ns.n, five_power_shell=ns.five_power_shell, shells=list(ns.shells),
    )


# -- inputs -----------------------------------------------------------------


def _load_modes(path: str) -> Eigenfunction:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read modes file {path!r}: {exc}") from exc
    if isinstance(data, dict):
        data = data.get("modes", data.get("mu"))
    if not isinstance(data, list) or not data:
        raise UsageError("modes file must hold a nonempty list of {l, re, im} entries")
    try:
        modes = [((int(d["l"][0]), int(d["l"][1])), complex(float(d.get("re", 0.0)), float(d.get("im", 0.0))))
                 for d in data]
        return torus_eigenfunction(modes)
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise UsageError(f"invalid modes file: {exc}") from exc


def eigenfunction_from_config(cfg: RunConfig) -> Eigenfunction:
    try:
        if cfg.surface == "torus":
            if (cfg.product is None) == (cfg.modes is None):
                raise UsageError("torus needs exactly one of --product or --modes")
            return product_mode(*cfg.product) if cfg.product else _load_modes(cfg.modes)
        if cfg.surface == "sphere":
            if cfg.ell is None:
                raise UsageError("sphere needs --ell (and optionally --m)")
            return sphere_harmonic(cfg.ell, cfg.m or 0)
        if cfg.surface == "rectangle":
            if cfg.jk is None:
                raise UsageError("rectangle needs --jk J K")
            return rectangle_mode(*cfg.jk)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError("--surface is required")


def grid_from_config(cfg: RunConfig) -> GridSpec | None:
    if cfg.grid is None:
        return None
    try:
        return GridSpec(resolution=cfg.grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# -- commands -----------------------------------------------------------------------


def cmd_analyze(cfg: RunConfig) -> tuple[str, int]:
    u = eigenfunction_from_config(cfg)
    grid = grid_from_config(cfg)
    if cfg.format == "svg":
        return cmd_export_svg(cfg)
    report = analyze(u, grid)
    code = EXIT_OK if report.all_hold else EXIT_VIOLATION
    if cfg.format == "csv":
        return verdicts_csv(report.verdicts, {"label": u.label()}), code
    return _dumps(report.to_json()), code


def cmd_export_svg(cfg: RunConfig) -> tuple[str, int]:
    u = eigenfunction_from_config(cfg)
    graph = suppress_corners(extract_nodal_graph(u, grid=grid_from_config(cfg)))
    return render_svg(graph, u), EXIT_OK


def _sweep_items(cfg: RunConfig) -> list[SweepItem]:
    if cfg.surface == "torus":
        if cfg.seed is not None:
            shells = tuple(cfg.shells) or RANDOM_SHELLS
            if any(s < 1 or r2_formula(s) == 0 for s in shells):
                raise UsageError("--shell values must be sums of two squares")
            count = cfg.n if cfg.n is not None else 100
            if count < 1:
                raise UsageError("--n must be positive")
            return random_items(count, cfg.seed, shells)
        max_l = cfg.n if cfg.n is not None else 4
        return [SweepItem(u.label(), u) for u in torus_catalog(max_l)]
    if cfg.surface == "sphere":
        max_ell = cfg.ell if cfg.ell is not None else 6
        return [SweepItem(u.label(), u) for u in sphere_catalog(max_ell)]
    if cfg.surface == "rectangle":
        j, k = cfg.jk if cfg.jk else (4, 4)
        return [SweepItem(u.label(), u) for u in rectangle_catalog(max(j, k))
                if u.j <= j and u.k <= k]
    raise UsageError("--surface is required")


def cmd_sweep(cfg: RunConfig) -> tuple[str, int]:
    items = _sweep_items(cfg)
    try:
        workers = worker_count()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = run_sweep(items, grid_from_config(cfg), workers)
    violations = sum(1 for r in rows if r.report and not r.report.all_hold)
    failures = sum(1 for r in rows if r.report is None)
    code = EXIT_VIOLATION if violations else EXIT_EXTRACTION if failures else EXIT_OK

    present = [t for t in THEOREM_ORDER if any(r.report and r.report.verdict(t) for r in rows)]
    min_slack = {}
    for t in present:
        slacks = [r.report.verdict(t).slack for r in rows if r.report and r.report.verdict(t)]
        min_slack[t] = min(slacks)

    if cfg.format == "json":
        doc = {
            "rows": [
                {"label": r.label, "seed": list(r.seed) if r.seed else None, "attempts": r.attempts,
                 "error": r.error, "report": r.report.to_json() if r.report else None}
                for r in rows
            ],
            "summary": {"violations": violations, "failures": failures,
                        "min_slack": {t: str(s) for t, s in min_slack.items()}},
        }
        return _dumps(doc), code
    if cfg.format == "svg":
        raise UsageError("sweep writes json or csv")

    buf = io.StringIO()
    buf.write(f"# {SWEEP_CSV_VERSION} verdicts={CSV_VERSION}\n")
    cols = list(SWEEP_COLUMNS) + [f"slack_{t}" for t in present]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        rep = r.report
        seed = "" if r.seed is None else ":".join(map(str, r.seed))
        if rep is None:
            w.writerow([r.label, seed] + [""] * (len(cols) - 3) + [r.error])
            continue
        base = [r.label, seed, rep.V, rep.E, rep.F, rep.n, rep.c, rep.interior_count, rep.boundary_count,
                rep.euler_slack, rep.cellular, rep.all_hold, ""]
        slacks = [str(rep.verdict(t).slack) if rep.verdict(t) else "" for t in present]
        w.writerow(base + slacks)
    w.writerow(["min_slack"] + [""] * (len(SWEEP_COLUMNS) - 1) + [str(min_slack[t]) for t in present])
    return buf.getvalue(), code


def cmd_construct(cfg: RunConfig) -> tuple[str, int]:
    if cfg.n is None:
        raise UsageError("construct needs --n")
    if cfg.format != "json":
        raise UsageError("construct writes json")
    try:
        u, cert = construct_high_vanishing(cfg.n, five_power_shell=cfg.five_power_shell)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    doc = {"certificate": cert.to_json()}
    code = EXIT_OK
    if cfg.grid is not None:
        report = analyze(u, grid_from_config(cfg))
        doc["analysis"] = report.to_json()
        code = EXIT_OK if report.all_hold else EXIT_VIOLATION
    return _dumps(doc), code


def cmd_r2(cfg: RunConfig) -> tuple[str, int]:
    if cfg.n is None or cfg.n < 0:
        raise UsageError("r2 needs --n N with N >= 0")
    doc = {
        "n": cfg.n,
        "r2": r2_formula(cfg.n),
        "r2_bruteforce": r2_bruteforce(cfg.n) if cfg.n <= BRUTEFORCE_LIMIT else None,
        "factorization": {str(p): e for p, e in sorted(factorize(cfg.n).items())} if cfg.n >= 1 else {},
    }
    if cfg.format == "csv":
        return f"n,r2,r2_bruteforce\n{doc['n']},{doc['r2']},{'' if doc['r2_bruteforce'] is None else doc['r2_bruteforce']}\n", EXIT_OK
    if cfg.format == "svg":
        raise UsageError("r2 writes json or csv")
    return _dumps(doc), EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "construct": cmd_construct,
    "r2": cmd_r2,
    "export-svg": cmd_export_svg,
}


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def main(argv=None) -> int:
    cfg = parse_config(argv)
    try:
        text, code = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"nodal-atlas: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ExtractionError, InvalidInput) as exc:
        diag = {"error": "extraction_failed", "message": str(exc),
                "location": list(exc.location) if getattr(exc, "location", None) is not None else None}
        try:
            _emit(_dumps(diag), cfg.out)
        except OSError:
            sys.stdout.write(_dumps(diag))
        return EXIT_EXTRACTION
    try:
        _emit(text, cfg.out)
    except OSError as exc:
        print(f"nodal-atlas: error: cannot write {cfg.out!r}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
