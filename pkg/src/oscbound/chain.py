"""Iterated derivative matrices A_0, A_1, ..., A_k.

Each step flattens the previous matrix column by column (top to bottom
within a column) into g_1 .. g_N and takes the transposed Jacobian, so the
next matrix is ``n x N`` with entry ``[i][s] = d g_s / d x_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ChainTooLarge, DimensionError
from .poly import Polynomial

DEFAULT_COLUMN_CAP = 10_000


@dataclass(frozen=True)
class PolyMatrix:
    rows: int
    cols: int
    entries: tuple[tuple[Polynomial, ...], ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise DimensionError("polynomial matrices must be nonempty")
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise DimensionError(f"entries do not form a {self.rows}x{self.cols} grid")
        ns = {p.num_vars for row in self.entries for p in row}
        if len(ns) != 1:
            raise DimensionError(f"entries mix variable counts {sorted(ns)}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Polynomial]]) -> "PolyMatrix":
        grid = tuple(tuple(r) for r in rows)
        return cls(len(grid), len(grid[0]) if grid else 0, grid)

    @property
    def num_vars(self) -> int:
        return self.entries[0][0].num_vars

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def column_major(self) -> list[Polynomial]:
        return [self.entries[i][j] for j in range(self.cols) for i in range(self.rows)]

    @property
    def degree(self) -> int:
        return max(p.degree for row in self.entries for p in row)

    def evaluate_many(self, points) -> np.ndarray:
        """Numeric matrices at each point, shape ``(N, rows, cols)``."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        out = np.empty((pts.shape[0], self.rows, self.cols))
        cache: dict[Polynomial, np.ndarray] = {}
        for i, row in enumerate(self.entries):
            for j, p in enumerate(row):
                if p not in cache:
                    cache[p] = p.evaluate_many(pts)
                out[:, i, j] = cache[p]
        return out

    def evaluate(self, point) -> np.ndarray:
        return np.array([[p.evaluate(point) for p in row] for row in self.entries])


def next_matrix(a: PolyMatrix) -> PolyMatrix:
    flat = a.column_major()
    n = a.num_vars
    return PolyMatrix.from_rows([[g.partial_derivative(i) for g in flat] for i in range(n)])


def gradient_seed(f: Polynomial) -> PolyMatrix:
    """The one-row seed ᵗ∇F used by the oscillatory-integral pipeline."""
    return PolyMatrix.from_rows([list(f.gradient())])


@dataclass(frozen=True)
class DerivativeChain:
    n: int
    r: int
    m: int
    matrices: tuple[PolyMatrix, ...]

    @property
    def depth(self) -> int:
        return len(self.matrices) - 1

    def __getitem__(self, j: int) -> PolyMatrix:
        return self.matrices[j]

    def __len__(self):
        return len(self.matrices)


def expected_columns(n: int, r: int, m: int, j: int) -> int:
    return r * m if j == 0 else n ** (j - 1) * r * m


def build_chain(seed: PolyMatrix, k: int, column_cap: int = DEFAULT_COLUMN_CAP) -> DerivativeChain:
    if k < 0:
        raise ValueError("chain depth k must be nonnegative")
    n, r, m = seed.num_vars, seed.rows, seed.cols
    for j in range(1, k + 1):
        cols = expected_columns(n, r, m, j)
        if cols > column_cap:
            raise ChainTooLarge(f"A_{j} would have {cols} columns (cap {column_cap})")
    mats = [seed]
    for j in range(1, k + 1):
        nxt = next_matrix(mats[-1])
        assert nxt.shape == (n, expected_columns(n, r, m, j))
        mats.append(nxt)
    return DerivativeChain(n, r, m, tuple(mats))
