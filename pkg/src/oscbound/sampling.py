"""Reproducible stratified sampling over a box.

Uniforms come from numpy's Philox, a counter-based generator: sample ``i``
always consumes counter block ``i`` of the stream keyed by ``seed``.  Any
partition of the index range into chunks (and any number of worker threads)
therefore produces bit-identical samples.

Sample ``i`` lives in stratum ``i mod S`` where the box is cut into ``b**n``
equal cells.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EmptyDomainError
from .poly import BoxDomain

CHUNK = 1 << 16
_INV_2_53 = 1.0 / float(1 << 53)


def counter_uniforms(seed: int, start: int, count: int, dim: int) -> np.ndarray:
    """Uniforms in [0, 1) for samples ``start .. start+count-1``, shape ``(count, dim)``."""
    if not 1 <= dim <= 4:
        raise ValueError("counter_uniforms supports 1..4 coordinates per sample")
    bitgen = np.random.Philox(key=int(seed), counter=int(start))
    raw = bitgen.random_raw(4 * count).reshape(count, 4)[:, :dim]
    return (raw >> np.uint64(11)).astype(np.float64) * _INV_2_53


def strata_per_axis(n: int, samples: int) -> int:
    b = 8 if n <= 2 else 4
    return max(1, min(b, int(math.floor(samples ** (1.0 / n) + 1e-9))))


@dataclass
class StratifiedSample:
    domain: BoxDomain
    seed: int
    points: np.ndarray          # (N, n)
    strata: np.ndarray          # (N,) stratum id of each sample
    per_stratum: np.ndarray     # (S,) sample count per stratum
    stratum_volume: float
    admissible: np.ndarray      # (N,) inside the constraint set
    workers: int = 1

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def num_strata(self) -> int:
        return self.per_stratum.shape[0]

    def map(self, field: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Evaluate ``field`` on every sample, chunked across workers in fixed order."""
        bounds = [(s, min(s + CHUNK, self.size)) for s in range(0, self.size, CHUNK)]
        if self.workers <= 1 or len(bounds) == 1:
            parts = [field(self.points[a:b]) for a, b in bounds]
        else:
            with ThreadPoolExecutor(self.workers) as pool:
                parts = list(pool.map(lambda ab: field(self.points[ab[0]:ab[1]]), bounds))
        return np.concatenate(parts)

    def estimate(self, mask: np.ndarray) -> tuple[float, float]:
        """Volume of the admissible samples flagged by ``mask`` and its standard error."""
        hits = np.bincount(self.strata[mask & self.admissible], minlength=self.num_strata)
        value, err = self._combine(hits[None, :])
        return float(value[0]), float(err[0])

    def _combine(self, hits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # hits: (G, S) integer counts; exact per stratum, so summation order is irrelevant
        ns = self.per_stratum.astype(np.float64)
        p = hits / ns
        value = self.stratum_volume * p.sum(axis=1)
        var = (self.stratum_volume ** 2) * (p * (1.0 - p) / ns).sum(axis=1)
        return value, np.sqrt(var)

    def cumulative(self, values: np.ndarray, thresholds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """For each threshold u: volume of admissible samples with ``values <= u`` and its error."""
        hits = np.empty((len(thresholds), self.num_strata), dtype=np.int64)
        for s in range(self.num_strata):
            sel = (self.strata == s) & self.admissible
            vs = np.sort(values[sel])
            hits[:, s] = np.searchsorted(vs, thresholds, side="right")
        return self._combine(hits)

    def admissible_volume(self) -> tuple[float, float]:
        return self.estimate(np.ones(self.size, dtype=bool))


def stratified_sample(domain: BoxDomain, samples: int, seed: int, workers: int = 1) -> StratifiedSample:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n = domain.num_vars
    b = strata_per_axis(n, samples)
    S = b ** n
    idx = np.arange(samples, dtype=np.int64)
    strata = idx % S
    cells = np.stack(np.unravel_index(strata, (b,) * n), axis=1).astype(np.float64)

    bounds = [(s, min(s + CHUNK, samples)) for s in range(0, samples, CHUNK)]
    gen = lambda ab: counter_uniforms(seed, ab[0], ab[1] - ab[0], n)
    if workers <= 1 or len(bounds) == 1:
        parts = [gen(ab) for ab in bounds]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(gen, bounds))
    u = np.concatenate(parts)

    lower = np.asarray(domain.lower)
    pts = lower + (cells + u) / b * domain.widths
    per = np.bincount(strata, minlength=S)
    admissible = domain.admits(pts) if domain.constraints else np.ones(samples, dtype=bool)
    if not admissible.any():
        raise EmptyDomainError("no sample satisfies the domain constraints")
    return StratifiedSample(domain, seed, pts, strata, per, domain.box_volume / S, admissible, workers)
