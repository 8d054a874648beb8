"""Heuristic global extrema of a scalar field over a box.

A regular grid is scanned first, then the incumbent is polished by a few
rounds of coordinate descent whose step shrinks 4x per round.  Nothing here
is certified; callers report the resolution alongside the value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EmptyDomainError
from .poly import BoxDomain

LINE_POINTS = 9


def default_resolution(n: int) -> int:
    return 64 if n <= 2 else 16


@dataclass(frozen=True)
class Extremum:
    value: float
    point: tuple[float, ...]
    resolution: int


def grid_points(domain: BoxDomain, resolution: int) -> np.ndarray:
    """``resolution`` cells per axis, so resolution 2R nests resolution R.  Lexicographic order."""
    axes = [np.linspace(a, b, resolution + 1) for a, b in zip(domain.lower, domain.upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _better(v, p, best_v, best_p):
    return v < best_v or (v == best_v and tuple(p) < tuple(best_p))


def box_extremum(func: Callable[[np.ndarray], np.ndarray], domain: BoxDomain,
                 resolution: int | None = None, refine_rounds: int = 3,
                 maximize: bool = False) -> Extremum:
    resolution = resolution or default_resolution(domain.num_vars)
    sign = -1.0 if maximize else 1.0
    pts = grid_points(domain, resolution)
    if domain.constraints:
        pts = pts[domain.admits(pts)]
        if not len(pts):
            raise EmptyDomainError("no grid point satisfies the domain constraints")
    vals = sign * np.asarray(func(pts), dtype=np.float64)
    i = int(np.argmin(vals))  # first hit in lexicographic order breaks ties
    best_v, best_p = float(vals[i]), pts[i].copy()

    lo, hi = np.asarray(domain.lower), np.asarray(domain.upper)
    step = domain.widths / resolution
    offsets = np.linspace(-1.0, 1.0, LINE_POINTS)
    for _ in range(refine_rounds):
        for d in range(domain.num_vars):
            line = np.repeat(best_p[None, :], LINE_POINTS, axis=0)
            line[:, d] = np.clip(best_p[d] + offsets * step[d], lo[d], hi[d])
            if domain.constraints:
                line = line[domain.admits(line)]
                if not len(line):
                    continue
            lv = sign * np.asarray(func(line), dtype=np.float64)
            for v, p in zip(lv, line):
                if _better(float(v), p, best_v, best_p):
                    best_v, best_p = float(v), p.copy()
        step = step / 4.0
    return Extremum(sign * best_v, tuple(float(x) for x in best_p), resolution)
