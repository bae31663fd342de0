"""Catalog and seeded random sweeps over eigenfunctions, run in a worker pool."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .eigenfamilies import Eigenfunction, product_mode, rectangle_mode, sphere_harmonic, torus_eigenfunction
from .lattice import shell
from .nodal_extract import ExtractionError, GridSpec
from .theorem_verify import AnalysisReport, analyze

THREADS_ENV = "NODAL_ATLAS_THREADS"
RANDOM_SHELLS = (1, 2, 4, 5, 25)
MAX_RESAMPLES = 20


def worker_count() -> int:
    """Pool size: CPU count, capped by the environment variable when set."""
    n = os.cpu_count() or 1
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError as exc:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from exc
    return n


def sphere_catalog(max_ell: int = 6, include_zero: bool = True) -> list[Eigenfunction]:
    start = 0 if include_zero else 1
    return [sphere_harmonic(l, m) for l in range(start, max_ell + 1) for m in range(-l, l + 1)]


def torus_catalog(max_l: int = 4) -> list[Eigenfunction]:
    return [product_mode(a, b) for a in range(1, max_l + 1) for b in range(1, max_l + 1)]


def rectangle_catalog(max_jk: int = 4) -> list[Eigenfunction]:
    return [rectangle_mode(j, k) for j in range(1, max_jk + 1) for k in range(1, max_jk + 1)]


def _half_shell(lam: int) -> list[tuple[int, int]]:
    return [p for p in shell(lam).points if p > (-p[0], -p[1])]


def random_shell_function(lam: int, rng: np.random.Generator, pinned: bool) -> Eigenfunction:
    """Random real eigenfunction ``sum a_l cos<l,x> + b_l sin<l,x>`` on one shell.

    ``pinned`` draws the coefficients from the subspace with ``u(p) = 0`` and
    ``grad u(p) = 0`` at a uniformly random point ``p``, so that the nodal set
    has a critical point; otherwise they are i.i.d. standard normal.
    """
    half = _half_shell(lam)
    L = np.array(half, dtype=float)
    if pinned:
        p = rng.uniform(-math.pi, math.pi, size=2)
        ph = L @ p
        # columns: cos terms then sin terms
        rows = [
            np.concatenate([np.cos(ph), np.sin(ph)]),
            np.concatenate([-L[:, 0] * np.sin(ph), L[:, 0] * np.cos(ph)]),
            np.concatenate([-L[:, 1] * np.sin(ph), L[:, 1] * np.cos(ph)]),
        ]
        basis = scipy.linalg.null_space(np.array(rows))
        coef = basis @ rng.standard_normal(basis.shape[1])
    else:
        coef = rng.standard_normal(2 * len(half))
    a, b = coef[: len(half)], coef[len(half):]
    mu = a - 1j * b
    mu = mu / np.max(np.abs(mu))
    return torus_eigenfunction([(l, complex(c)) for l, c in zip(half, mu)])


@dataclass(frozen=True)
class SweepItem:
    label: str
    eigenfunction: Eigenfunction | None = None
    lam: int | None = None
    seed: tuple[int, ...] | None = None
    pinned: bool = False


@dataclass
class SweepRow:
    label: str
    report: AnalysisReport | None
    error: str | None = None
    attempts: int = 1
    seed: tuple[int, ...] | None = field(default=None)


def random_items(count: int, seed: int, shells=RANDOM_SHELLS) -> list[SweepItem]:
    """``count`` seeded random combinations spread evenly over ``shells``; alternate ones pinned."""
    items = []
    for i in range(count):
        lam = shells[i % len(shells)]
        pinned = (i // len(shells)) % 2 == 0
        items.append(SweepItem(f"random lambda={lam} #{i}", lam=lam, seed=(seed, i), pinned=pinned))
    return items


def _run_item(args) -> SweepRow:
    item, grid = args
    if item.eigenfunction is not None:
        try:
            return SweepRow(item.label, analyze(item.eigenfunction, grid))
        except ExtractionError as exc:
            return SweepRow(item.label, None, str(exc))
    last = None
    for attempt in range(MAX_RESAMPLES):
        rng = np.random.default_rng(list(item.seed) + [attempt])
        u = random_shell_function(item.lam, rng, item.pinned)
        try:
            return SweepRow(item.label, analyze(u, grid), attempts=attempt + 1, seed=item.seed + (attempt,))
        except ExtractionError as exc:
            last = str(exc)
    return SweepRow(item.label, None, last, attempts=MAX_RESAMPLES, seed=item.seed)


def run_sweep(items: list[SweepItem], grid: GridSpec | None = None, workers: int | None = None) -> list[SweepRow]:
    """Analyse every item; rows come back in input order whatever the pool does."""
    workers = workers or worker_count()
    jobs = [(it, grid) for it in items]
    if workers <= 1 or len(jobs) <= 1:
        return [_run_item(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_item, jobs, chunksize=1))
