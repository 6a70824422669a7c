"""PRD surfaces over the 6-tap filter plane and best-wavelet matching.

Scanning the two-angle plane with the compression pipeline yields a
surface of PRD values per signal; its minima mark the filters that
represent the signal best.  Averaging per-recording minima across a
cohort gives the aggregate best-matching point ``(a*, b*)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .compression import CompressionConfig, compress
from .io import Cohort
from .wavelets import Signal

__all__ = [
    "GridSpec",
    "PrdSurface",
    "PlaneMinimum",
    "MatchResult",
    "prd_surface",
    "refine_surface",
    "surface_minima",
    "aggregate_best",
    "match_cohort",
    "surface_to_csv",
    "surface_to_pgm",
    "minima_to_csv",
]


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid over the filter plane (inclusive endpoints)."""

    resolution: int = 64
    a_range: tuple = (-math.pi, math.pi)
    b_range: tuple = (-math.pi, math.pi)

    def __post_init__(self):
        if int(self.resolution) != self.resolution or self.resolution < 8:
            raise ValueError("grid resolution must be an integer of at least 8")
        for lo, hi in (self.a_range, self.b_range):
            if not (-math.pi <= lo < hi <= math.pi):
                raise ValueError(
                    f"grid range ({lo}, {hi}) must be increasing and within [-pi, pi]"
                )

    @property
    def a_values(self) -> np.ndarray:
        return np.linspace(self.a_range[0], self.a_range[1], int(self.resolution))

    @property
    def b_values(self) -> np.ndarray:
        return np.linspace(self.b_range[0], self.b_range[1], int(self.resolution))


@dataclass(frozen=True)
class PrdSurface:
    """PRD values on a plane grid; ``prd[i, j]`` belongs to (a[i], b[j])."""

    a_values: np.ndarray
    b_values: np.ndarray
    prd: np.ndarray
    cr: float
    levels: int

    def __post_init__(self):
        prd = np.asarray(self.prd, dtype=np.float64)
        if prd.shape != (len(self.a_values), len(self.b_values)):
            raise ValueError("surface shape does not match its axes")
        if not np.all(np.isfinite(prd)):
            raise ValueError("surface contains non-finite PRD values")

    @property
    def argmin(self) -> tuple:
        """Grid minimum as ``(a, b, prd)``; first node in (a, b) order on ties."""
        flat = int(np.argmin(self.prd))
        i, j = np.unravel_index(flat, self.prd.shape)
        return (float(self.a_values[i]), float(self.b_values[j]), float(self.prd[i, j]))


def _surface_values(signal, a_values, b_values, cr, levels, workers):
    def row(i):
        a = a_values[i]
        return [
            compress(signal, CompressionConfig(wavelet=(a, b), cr=cr, levels=levels)).prd_percent
            for b in b_values
        ]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, range(len(a_values))))
    else:
        rows = [row(i) for i in range(len(a_values))]
    return np.asarray(rows)


def prd_surface(
    x, grid: GridSpec, cr: float = 3.0, levels: int = 6, workers: int = 1
) -> PrdSurface:
    """Evaluate the compression PRD at every plane point of a grid.

    Grid nodes are independent pure evaluations, so ``workers`` threads
    may share the scan; the assembled surface is identical either way.
    """
    signal = x if isinstance(x, Signal) else Signal(x)
    if workers < 1:
        raise ValueError("workers must be at least 1")
    values = _surface_values(
        signal, grid.a_values, grid.b_values, float(cr), int(levels), int(workers)
    )
    return PrdSurface(
        a_values=grid.a_values,
        b_values=grid.b_values,
        prd=values,
        cr=float(cr),
        levels=int(levels),
    )


def refine_surface(
    x, surface: PrdSurface, resolution: int = 8, workers: int = 1
) -> PrdSurface:
    """Re-scan one grid cell around the surface argmin at finer spacing.

    The sub-grid spans one original cell on each side of the argmin,
    clamped to the plane bounds.
    """
    a_star, b_star, _ = surface.argmin
    step_a = surface.a_values[1] - surface.a_values[0]
    step_b = surface.b_values[1] - surface.b_values[0]
    grid = GridSpec(
        resolution=resolution,
        a_range=(max(-math.pi, a_star - step_a), min(math.pi, a_star + step_a)),
        b_range=(max(-math.pi, b_star - step_b), min(math.pi, b_star + step_b)),
    )
    return prd_surface(x, grid, cr=surface.cr, levels=surface.levels, workers=workers)


def surface_minima(surface: PrdSurface) -> list:
    """Ranked minima of a surface as ``(a, b, prd)`` triples.

    The global argmin comes first; then every strict local minimum (below
    all of its existing 8-neighbours), ordered by PRD and then by (a, b).
    """
    prd = surface.prd
    rows, cols = prd.shape
    global_a, global_b, global_value = surface.argmin
    locals_ = []
    for i in range(rows):
        for j in range(cols):
            value = prd[i, j]
            window = prd[
                max(0, i - 1) : min(rows, i + 2), max(0, j - 1) : min(cols, j + 2)
            ]
            # The window contains the node itself, so strict dominance of
            # all neighbours means exactly one entry is <= value.
            if np.count_nonzero(window <= value) == 1:
                a, b = float(surface.a_values[i]), float(surface.b_values[j])
                if (a, b) != (global_a, global_b):
                    locals_.append((a, b, float(value)))
    locals_.sort(key=lambda t: (t[2], t[0], t[1]))
    return [(global_a, global_b, global_value)] + locals_


def aggregate_best(minima) -> tuple:
    """Component-wise mean of per-recording minima ``(a_i, b_i)``."""
    minima = list(minima)
    if not minima:
        raise ValueError("cannot aggregate an empty list of minima")
    a_star = float(np.mean([m[0] for m in minima]))
    b_star = float(np.mean([m[1] for m in minima]))
    return (a_star, b_star)


@dataclass(frozen=True)
class PlaneMinimum:
    """Per-recording surface argmin."""

    subject: str
    channel: int
    a: float
    b: float
    prd_percent: float


@dataclass(frozen=True)
class MatchResult:
    """Cohort-level wavelet match: per-recording minima and their mean."""

    minima: tuple
    aggregate: tuple  # (a*, b*) in radians
    cr: float
    levels: int

    def __post_init__(self):
        expected = aggregate_best([(m.a, m.b) for m in self.minima])
        if not np.allclose(self.aggregate, expected, atol=1e-12):
            raise ValueError("aggregate must be the mean of the per-recording minima")


def match_cohort(
    cohort: Cohort,
    state: str = "basal",
    grid: GridSpec = GridSpec(),
    cr: float = 3.0,
    levels: int = 6,
    channels=None,
    refine: bool = False,
    workers: int = 1,
) -> MatchResult:
    """Locate the best-matching plane point for every recording of a state.

    One recording is one (subject, channel) trace.  Each gets a PRD
    surface; its global argmin (optionally refined by a sub-grid pass)
    enters the cohort aggregate.
    """
    selected = list(channels) if channels is not None else list(cohort.channel_ids)
    minima = []
    for subject in cohort.subjects:
        rec = cohort.get(subject, state)
        period = 1.0 / rec.sample_rate_hz
        for ch in selected:
            signal = Signal(rec.channel(ch), sample_period_s=period)
            surface = prd_surface(signal, grid, cr=cr, levels=levels, workers=workers)
            if refine:
                surface = refine_surface(signal, surface, workers=workers)
            a, b, value = surface.argmin
            minima.append(
                PlaneMinimum(subject=subject, channel=int(ch), a=a, b=b, prd_percent=value)
            )
    aggregate = aggregate_best([(m.a, m.b) for m in minima])
    return MatchResult(
        minima=tuple(minima), aggregate=aggregate, cr=float(cr), levels=int(levels)
    )


def surface_to_csv(surface: PrdSurface, path) -> Path:
    """Write a surface as ``a,b,prd`` rows (a-major order)."""
    path = Path(path)
    lines = ["a,b,prd"]
    for i, a in enumerate(surface.a_values):
        for j, b in enumerate(surface.b_values):
            lines.append("%.17g,%.17g,%.17g" % (a, b, surface.prd[i, j]))
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")
    return path


def surface_to_pgm(surface: PrdSurface, path) -> Path:
    """Write a surface as an ASCII PGM raster, low PRD rendered dark.

    Rows run from the largest ``b`` down to the smallest (image
    convention); columns run across ``a``.
    """
    path = Path(path)
    prd = surface.prd
    lo, hi = float(prd.min()), float(prd.max())
    if hi > lo:
        gray = np.rint((prd - lo) / (hi - lo) * 255.0).astype(int)
    else:
        gray = np.zeros(prd.shape, dtype=int)
    lines = ["P2", f"{prd.shape[0]} {prd.shape[1]}", "255"]
    for j in range(prd.shape[1] - 1, -1, -1):
        lines.append(" ".join(str(gray[i, j]) for i in range(prd.shape[0])))
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")
    return path


def minima_to_csv(result: MatchResult) -> str:
    """Render per-recording minima plus the aggregate row as CSV."""
    lines = ["subject,channel,a,b,prd_percent"]
    for m in result.minima:
        lines.append(
            f"{m.subject},{m.channel},{m.a:.10f},{m.b:.10f},{m.prd_percent:.6f}"
        )
    a_star, b_star = result.aggregate
    lines.append(f"aggregate,,{a_star:.10f},{b_star:.10f},")
    return "\n".join(lines) + "\n"
