"""Level profile φ(u) = ∫_{F=u} ds/|∇F| via the distribution function.

By the co-area formula φ is the derivative of V(u) = vol{F <= u}, so it is
recovered here as a central difference of a Monte Carlo estimate of V on a
uniform u grid.  The oscillatory integral then collapses to the 1-D
quadrature ∫ φ(u) e^{2πiu} du over [m, M].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProfileError
from .measure import gradient_norm_field
from .poly import BoxDomain, Polynomial
from .sampling import StratifiedSample, stratified_sample
from .search import box_extremum

GRADIENT_WARN = 1e-9


@dataclass(frozen=True)
class LevelProfile:
    u_grid: np.ndarray
    V: np.ndarray
    V_error: np.ndarray
    phi: np.ndarray
    m: float
    M: float
    step: float
    noise_scale: float
    volume: float
    grad_min: float

    @property
    def grid_points(self) -> int:
        return len(self.u_grid)

    def normalization(self) -> float:
        """Trapezoid integral of φ over [m, M]; should equal the domain volume."""
        return float(np.trapezoid(self.phi, self.u_grid))


@dataclass(frozen=True)
class MonotonePieces:
    breakpoints: tuple[int, ...]      # start index of each piece in u_grid
    directions: tuple[str, ...]       # "nondecreasing" | "nonincreasing"
    tolerance: float

    @property
    def count(self) -> int:
        return len(self.breakpoints)

    def piece_index(self, length: int) -> np.ndarray:
        idx = np.zeros(length, dtype=np.int64)
        for p, start in enumerate(self.breakpoints):
            idx[start:] = p
        return idx


def level_profile(f: Polynomial, domain: BoxDomain, grid_points: int = 512, samples: int = 1_000_000,
                  seed: int = 0, workers: int = 1, extrema_resolution: int | None = None,
                  sample: StratifiedSample | None = None) -> LevelProfile:
    if grid_points < 16:
        raise ValueError("grid_points must be >= 16")
    lo = box_extremum(f.evaluate_many, domain, extrema_resolution)
    hi = box_extremum(f.evaluate_many, domain, extrema_resolution, maximize=True)
    m0, M0 = lo.value, hi.value
    if not M0 > m0:
        raise DegenerateProfileError("F is constant on the domain (m = M)")
    gmin = box_extremum(gradient_norm_field(f), domain, extrema_resolution).value
    if gmin < GRADIENT_WARN:
        warnings.warn(f"min sampled |grad F| = {gmin:.3g}; profile has an integrable singularity",
                      RuntimeWarning, stacklevel=2)

    # widen the sampled range [m0, M0] by exactly one grid step on each side
    h = (M0 - m0) / (grid_points - 3)
    u = m0 - h + h * np.arange(grid_points)
    smp = sample if sample is not None else stratified_sample(domain, samples, seed, workers)
    values = smp.map(f.evaluate_many)
    V, V_err = smp.cumulative(values, u)
    phi = np.gradient(V, h)
    volume, _ = smp.admissible_volume()
    return LevelProfile(u, V, V_err, phi, float(u[0]), float(u[-1]), h,
                        float(V_err.max() / h), volume, gmin)


def monotone_split(profile: LevelProfile | np.ndarray, tolerance: float | None = None) -> MonotonePieces:
    """Greedy change-point scan: a piece ends when φ reverses by more than ``tolerance``."""
    if isinstance(profile, LevelProfile):
        phi = profile.phi
        if tolerance is None:
            tolerance = 2.0 * profile.noise_scale
    else:
        phi = np.asarray(profile, dtype=np.float64)
        tolerance = 0.0 if tolerance is None else tolerance
    if tolerance < 0:
        raise ValueError("tolerance must be nonnegative")

    starts, dirs = [0], []
    direction = None
    hi_v = lo_v = float(phi[0])
    hi_i = lo_i = 0
    for i in range(1, len(phi)):
        v = float(phi[i])
        if direction is None:
            if v > hi_v:
                hi_v, hi_i = v, i
            if v < lo_v:
                lo_v, lo_i = v, i
            if v - lo_v > tolerance:
                direction, hi_v, hi_i = "up", v, i
            elif hi_v - v > tolerance:
                direction, lo_v, lo_i = "down", v, i
        elif direction == "up":
            if v >= hi_v:
                hi_v, hi_i = v, i
            elif hi_v - v > tolerance:
                dirs.append("up")
                starts.append(hi_i)
                direction, lo_v, lo_i = "down", v, i
        else:
            if v <= lo_v:
                lo_v, lo_i = v, i
            elif v - lo_v > tolerance:
                dirs.append("down")
                starts.append(lo_i)
                direction, hi_v, hi_i = "up", v, i
    dirs.append(direction or "up")
    names = {"up": "nondecreasing", "down": "nonincreasing"}
    return MonotonePieces(tuple(starts), tuple(names[d] for d in dirs), float(tolerance))


def oscillatory_from_profile(profile: LevelProfile) -> complex:
    """Trapezoid quadrature of φ(u) e^{2πiu} over the profile grid."""
    u = profile.u_grid
    return complex(np.trapezoid(profile.phi * np.exp(2j * np.pi * u), u))


def profile_rows(profile: LevelProfile, pieces: MonotonePieces) -> list[tuple[float, float, float, int]]:
    idx = pieces.piece_index(profile.grid_points)
    return [(float(u), float(v), float(p), int(k))
            for u, v, p, k in zip(profile.u_grid, profile.V, profile.phi, idx)]
