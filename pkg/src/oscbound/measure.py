"""Volumes of sublevel sets {G_0 <= H} and measures of hypersurface pieces.

Volumes are stratified Monte Carlo estimates on a fixed, seed-keyed sample
set.  Hypersurface measure (curve length for n = 2, area for n = 3) comes
from isocontour extraction of {f = 0} on a regular grid; the error column
holds the change observed when the grid is coarsened by a factor of two.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, UnsupportedGeometryError
from .poly import BoxDomain, Polynomial
from .sampling import StratifiedSample, stratified_sample

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    std_error: float
    samples: int
    method: str           # "monte_carlo" | "grid" | "marching"
    skipped: int = 0      # degenerate-gradient segments dropped (marching only)


@dataclass(frozen=True)
class SurfaceSystem:
    equations: tuple[Polynomial, ...]
    ambient: BoxDomain

    def __post_init__(self):
        n = self.ambient.num_vars
        if len(self.equations) > n:
            raise DimensionError("a surface system has at most n equations")
        if any(f.num_vars != n for f in self.equations):
            raise DimensionError("surface equations must share the ambient dimension")

    @property
    def dimension(self) -> int:
        return self.ambient.num_vars - len(self.equations)


def gradient_norm_field(f: Polynomial) -> Field:
    grads = f.gradient()

    def g0(pts):
        acc = np.zeros(np.atleast_2d(pts).shape[0])
        for g in grads:
            v = g.evaluate_many(pts)
            acc += v * v
        return np.sqrt(acc)

    return g0


def _sample(domain, samples, seed, workers, sample):
    return sample if sample is not None else stratified_sample(domain, samples, seed, workers)


def sublevel_measures(g0: Field, domain: BoxDomain, Hs: Sequence[float], samples: int = 100_000,
                      seed: int = 0, workers: int = 1,
                      sample: StratifiedSample | None = None) -> list[MeasureEstimate]:
    """vol{x in domain : g0(x) <= H} for each H, all from one sample set."""
    Hs = np.asarray(Hs, dtype=np.float64)
    if np.any(Hs < 0):
        raise ValueError("H must be nonnegative")
    smp = _sample(domain, samples, seed, workers, sample)
    vals = smp.map(g0)
    value, err = smp.cumulative(vals, Hs)
    return [MeasureEstimate(float(v), float(e), smp.size, "monte_carlo") for v, e in zip(value, err)]


def sublevel_measure(g0: Field, domain: BoxDomain, H: float, samples: int = 100_000,
                     seed: int = 0, workers: int = 1) -> MeasureEstimate:
    return sublevel_measures(g0, domain, [H], samples, seed, workers)[0]


def dyadic_shell_measures(g0: Field, domain: BoxDomain, H: float, J: int, samples: int = 100_000,
                          seed: int = 0, workers: int = 1,
                          sample: StratifiedSample | None = None) -> list[MeasureEstimate]:
    """Shell j (1-based) is {2^-j H <= g0 < 2^(1-j) H}; half-open so shells are disjoint."""
    if J < 1:
        raise ValueError("J must be >= 1")
    if H < 0:
        raise ValueError("H must be nonnegative")
    smp = _sample(domain, samples, seed, workers, sample)
    vals = smp.map(g0)
    out = []
    for j in range(1, J + 1):
        lo, hi = H * 2.0 ** -j, H * 2.0 ** (1 - j)
        v, e = smp.estimate((vals >= lo) & (vals < hi))
        out.append(MeasureEstimate(v, e, smp.size, "monte_carlo"))
    return out


# -- isocontours ------------------------------------------------------------

def _node_grid(domain: BoxDomain, resolution: int):
    axes = [np.linspace(a, b, resolution + 1) for a, b in zip(domain.lower, domain.upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return axes, np.stack([m.ravel() for m in mesh], axis=1)


def marching_squares(values: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Segments ``(S, 2, 2)`` of the zero contour of ``values[i, j] = f(xs[i], ys[j])``."""
    v00, v10 = values[:-1, :-1], values[1:, :-1]
    v01, v11 = values[:-1, 1:], values[1:, 1:]
    X0, Y0 = np.meshgrid(xs[:-1], ys[:-1], indexing="ij")
    X1, Y1 = np.meshgrid(xs[1:], ys[1:], indexing="ij")
    # corners (a, b) for edges: bottom, right, top, left
    corners = [((v00, X0, Y0), (v10, X1, Y0)), ((v10, X1, Y0), (v11, X1, Y1)),
               ((v01, X0, Y1), (v11, X1, Y1)), ((v00, X0, Y0), (v01, X0, Y1))]
    has = np.empty(v00.shape + (4,), dtype=bool)
    pts = np.empty(v00.shape + (4, 2))
    for e, ((va, xa, ya), (vb, xb, yb)) in enumerate(corners):
        cross = (va >= 0) != (vb >= 0)
        denom = np.where(cross, va - vb, 1.0)
        t = np.where(cross, va / denom, 0.0)
        has[..., e] = cross
        pts[..., e, 0] = xa + t * (xb - xa)
        pts[..., e, 1] = ya + t * (yb - ya)
    has = has.reshape(-1, 4)
    pts = pts.reshape(-1, 4, 2)
    count = has.sum(axis=1)
    segs = []

    two = np.nonzero(count == 2)[0]
    if len(two):
        h = has[two]
        first = np.argmax(h, axis=1)
        second = 3 - np.argmax(h[:, ::-1], axis=1)
        segs.append(np.stack([pts[two, first], pts[two, second]], axis=1))

    four = np.nonzero(count == 4)[0]
    if len(four):
        c = np.stack([v00.ravel()[four], v10.ravel()[four], v01.ravel()[four], v11.ravel()[four]])
        center_pos = c.mean(axis=0) >= 0
        joined = center_pos == (c[0] >= 0)   # 00 and 11 connected through the centre
        p = pts[four]
        a1 = p[:, 0]
        b1 = np.where(joined[:, None], p[:, 1], p[:, 3])
        a2 = np.where(joined[:, None], p[:, 2], p[:, 1])
        b2 = np.where(joined[:, None], p[:, 3], p[:, 2])
        segs.append(np.stack([a1, b1], axis=1))
        segs.append(np.stack([a2, b2], axis=1))
    if not segs:
        return np.empty((0, 2, 2))
    return np.concatenate(segs)


def _contour_pieces(f: Polynomial, domain: BoxDomain, resolution: int):
    """(sizes, midpoints) of the segments / triangles of {f = 0}."""
    axes, nodes = _node_grid(domain, resolution)
    vals = f.evaluate_many(nodes).reshape((resolution + 1,) * domain.num_vars)
    if domain.num_vars == 2:
        segs = marching_squares(vals, axes[0], axes[1])
        sizes = np.linalg.norm(segs[:, 1] - segs[:, 0], axis=1)
        return sizes, segs.mean(axis=1)
    if vals.min() > 0 or vals.max() < 0:
        return np.empty(0), np.empty((0, 3))
    from skimage.measure import marching_cubes

    spacing = tuple(domain.widths / resolution)
    verts, faces, _, _ = marching_cubes(vals, level=0.0, spacing=spacing)
    verts = verts + np.asarray(domain.lower)
    tri = verts[faces]
    sizes = 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    return sizes, tri.mean(axis=1)


def _filtered_size(f, domain, resolution, restrict_g0, H):
    sizes, mids = _contour_pieces(f, domain, resolution)
    keep = np.ones(len(sizes), dtype=bool)
    if domain.constraints and len(sizes):
        keep &= domain.admits(mids)
    if restrict_g0 is not None and len(sizes):
        keep &= restrict_g0(mids) <= H
    skipped = 0
    if len(sizes):
        gnorm = gradient_norm_field(f)(mids)
        degenerate = gnorm <= 1e-12 * max(1.0, float(gnorm.max()))
        skipped = int(np.count_nonzero(degenerate & keep & (sizes > 0)))
        keep &= ~degenerate
    return float(np.sum(np.sort(sizes[keep]))), int(np.count_nonzero(keep)), skipped


def surface_measure(system: SurfaceSystem, restrict_g0: Field | None = None, H: float | None = None,
                    resolution: int = 512) -> MeasureEstimate:
    """Length (n = 2) or area (n = 3) of {f_1 = 0}, optionally only where g0 <= H."""
    n = system.ambient.num_vars
    if n not in (2, 3) or len(system.equations) != 1:
        raise UnsupportedGeometryError("surface measure needs n in {2, 3} and a single equation")
    if (restrict_g0 is None) != (H is None):
        raise ValueError("restrict_g0 and H must be given together")
    if resolution < 4:
        raise ValueError("resolution must be >= 4")
    f = system.equations[0]
    value, count, skipped = _filtered_size(f, system.ambient, resolution, restrict_g0, H)
    coarse, _, _ = _filtered_size(f, system.ambient, resolution // 2, restrict_g0, H)
    return MeasureEstimate(value, abs(value - coarse), count, "marching", skipped)


def level_surface(f: Polynomial, u: float) -> Polynomial:
    return f - Polynomial.constant(f.num_vars, Fraction(float(u)))


def max_level_area(f: Polynomial, domain: BoxDomain, levels: Sequence[float],
                   resolution: int = 256) -> tuple[float, float]:
    """Largest measure of {f = u} over the given levels, and the maximizing level."""
    best, best_u = -1.0, float("nan")
    for u in levels:
        est = surface_measure(SurfaceSystem((level_surface(f, u),), domain), resolution=resolution)
        if est.value > best:
            best, best_u = est.value, float(u)
    return best, best_u
