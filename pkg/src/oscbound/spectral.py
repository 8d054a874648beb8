"""Singular-value quantities of the derivative chain and their extrema over a box.

Singular values come from a batched one-sided (Hestenes) Jacobi iteration:
columns are rotated pairwise until mutually orthogonal, after which the
column norms are the singular values.  Matrices here are at most a few
hundred entries, where Jacobi is both simple and accurate to ~1e-15.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chain import DerivativeChain, PolyMatrix
from .poly import BoxDomain
from .search import box_extremum, default_resolution

JACOBI_TOL = 1e-13
MAX_SWEEPS = 60


def jacobi_singular_values(mats) -> np.ndarray:
    """Singular values of a stack ``(B, p, q)`` of matrices, each row sorted descending."""
    a = np.array(mats, dtype=np.float64, copy=True)
    if a.ndim == 2:
        a = a[None]
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if a.shape[1] < a.shape[2]:
        a = np.ascontiguousarray(np.swapaxes(a, 1, 2))
    cols = a.shape[2]
    for _ in range(MAX_SWEEPS):
        rotated = False
        for i in range(cols - 1):
            for j in range(i + 1, cols):
                ai, aj = a[:, :, i], a[:, :, j]
                alpha = np.einsum("bk,bk->b", ai, ai)
                beta = np.einsum("bk,bk->b", aj, aj)
                gamma = np.einsum("bk,bk->b", ai, aj)
                scale = np.sqrt(alpha * beta)
                active = np.abs(gamma) > JACOBI_TOL * scale
                if not active.any():
                    continue
                rotated = True
                g = np.where(active, gamma, 1.0)
                zeta = (beta - alpha) / (2.0 * g)
                sgn = np.where(zeta >= 0, 1.0, -1.0)
                t = np.where(active, sgn / (np.abs(zeta) + np.hypot(1.0, zeta)), 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                new_i = c[:, None] * ai - s[:, None] * aj
                new_j = s[:, None] * ai + c[:, None] * aj
                a[:, :, i] = new_i
                a[:, :, j] = new_j
        if not rotated:
            break
    sv = np.sqrt(np.einsum("bkc,bkc->bc", a, a))
    return -np.sort(-sv, axis=1)


def singular_values(m) -> np.ndarray:
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    return jacobi_singular_values(arr[None])[0]


def _check_r(r: int, shape) -> None:
    if not 1 <= r <= min(shape[-2:]):
        raise ValueError(f"r={r} outside 1..{min(shape[-2:])}")


def smallest_r_product(m, r: int) -> float:
    """Product of the ``r`` smallest singular values."""
    _check_r(r, np.shape(m))
    return float(np.prod(singular_values(m)[-r:]))


def smallest_r_product_batch(mats: np.ndarray, r: int) -> np.ndarray:
    _check_r(r, mats.shape)
    return np.prod(jacobi_singular_values(mats)[:, -r:], axis=1)


def frobenius_norm(m) -> float:
    arr = np.asarray(m, dtype=np.float64)
    return float(np.sqrt(np.sum(arr * arr)))


@dataclass(frozen=True)
class SpectralSummary:
    singular_values: tuple[float, ...]
    g_product: float
    frobenius: float


def spectral_summary(m, r: int) -> SpectralSummary:
    sv = singular_values(m)
    _check_r(r, np.shape(m))
    return SpectralSummary(tuple(float(s) for s in sv), float(np.prod(sv[-r:])), frobenius_norm(m))


def theorem4_r_levels(n: int, depth: int) -> list[int]:
    """r per chain level for the gradient seed: 1 at level 0, n above."""
    return [1] + [n] * depth


def effective_r(r: int, mat: PolyMatrix) -> int:
    return max(1, min(r, mat.rows, mat.cols))


def g_field(mat: PolyMatrix, r: int):
    r = effective_r(r, mat)
    return lambda pts: smallest_r_product_batch(mat.evaluate_many(pts), r)


def min_singular_field(mat: PolyMatrix):
    return lambda pts: jacobi_singular_values(mat.evaluate_many(pts))[:, -1]


def frobenius_field(mat: PolyMatrix):
    def f(pts):
        vals = mat.evaluate_many(pts)
        return np.sqrt(np.einsum("bij,bij->b", vals, vals))
    return f


@dataclass(frozen=True)
class ChainExtrema:
    g_min: tuple[float, ...]
    g_argmin: tuple[tuple[float, ...], ...]
    l_levels: tuple[float, ...]
    l_max: float
    l_argmax: tuple[float, ...]
    r_levels: tuple[int, ...]
    sample_resolution: int
    refine_rounds: int
    heuristic: bool = field(default=True)


def chain_extrema(chain: DerivativeChain, domain: BoxDomain, resolution: int | None = None,
                  refine_rounds: int = 3, r_levels: Sequence[int] | None = None) -> ChainExtrema:
    """Sampled G_j = min G_j(x) per level and L = max_j max_x ||A_j(x)||_F."""
    resolution = resolution or default_resolution(chain.n)
    if r_levels is None:
        r_levels = theorem4_r_levels(chain.n, chain.depth)
    r_eff = [effective_r(r, mat) for r, mat in zip(r_levels, chain.matrices)]
    g_min, g_arg, l_lv, l_arg = [], [], [], []
    for mat, r in zip(chain.matrices, r_eff):
        lo = box_extremum(g_field(mat, r), domain, resolution, refine_rounds)
        hi = box_extremum(frobenius_field(mat), domain, resolution, refine_rounds, maximize=True)
        g_min.append(max(lo.value, 0.0))
        g_arg.append(lo.point)
        l_lv.append(hi.value)
        l_arg.append(hi.point)
    top = int(np.argmax(l_lv))
    return ChainExtrema(tuple(g_min), tuple(g_arg), tuple(l_lv), l_lv[top], l_arg[top],
                        tuple(r_eff), resolution, refine_rounds)
