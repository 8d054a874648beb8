"""Explicit right-hand sides of the surface-measure and oscillatory-integral bounds.

All constants whose values are only known to exist (chart counts, series
sums, c_1..c_4, the monotone-piece bound K) live in :class:`ConstantsConfig`
and default to 1.  Logarithms are natural; every log argument is an
h-value, h(a) = a + 1/a >= 2, so log factors are bounded below by log 2.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from .chain import DerivativeChain
from .errors import BoundInputError
from .poly import BoxDomain
from .search import box_extremum
from .spectral import frobenius_field, min_singular_field

THEOREM4_CASES = ("k_ge_r", "k_lt_r_a", "k_lt_r_b")


@dataclass(frozen=True)
class ConstantsConfig:
    F_charts: float = 1.0
    T0: float = 1.0
    K: float = 1.0
    c_dprime: float = 1.0
    c_n: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise BoundInputError(f"constant {f.name} must be a positive finite number, got {v!r}")
            object.__setattr__(self, f.name, float(v))

    @classmethod
    def from_dict(cls, data: dict | None) -> "ConstantsConfig":
        data = dict(data or {})
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise BoundInputError(f"unknown constants {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BoundInputs:
    n: int
    r: int
    k: int
    H: float = 1.0
    G_levels: tuple[float, ...] = ()     # G_1 .. G_k
    G_paren: tuple[float, ...] = ()      # G_(1) .. G_(k)
    L: float = 1.0
    H_tilde: float = 1.0                 # max |grad F|
    H_1: float = 1.0                     # min |grad F|
    Pi_area: float = 1.0                 # largest level-surface measure
    vol_omega: float = 1.0
    G_det: float = 0.0                   # min sqrt(det(A_{k-1} A_{k-1}^t)), case k_ge_r

    def level(self, j: int) -> float:
        if not 1 <= j <= len(self.G_levels):
            raise BoundInputError(f"G_{j} not supplied (have G_1..G_{len(self.G_levels)})")
        return self.G_levels[j - 1]

    def paren(self, j: int) -> float:
        if not 1 <= j <= len(self.G_paren):
            raise BoundInputError(f"G_({j}) not supplied")
        return self.G_paren[j - 1]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["G_levels"] = list(self.G_levels)
        d["G_paren"] = list(self.G_paren)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BoundInputs":
        d = dict(d)
        d["G_levels"] = tuple(d.get("G_levels", ()))
        d["G_paren"] = tuple(d.get("G_paren", ()))
        return cls(**d)


def _positive(**values):
    for name, v in values.items():
        if not v > 0:
            raise BoundInputError(f"{name} must be positive, got {v!r}")


def h(a: float) -> float:
    if not a > 0:
        raise BoundInputError(f"h(a) needs a > 0, got {a!r}")
    return a + 1.0 / a


def c0(r: int) -> float:
    """pi^(-r/2) Gamma(1 + r/2): reciprocal volume of the unit r-ball."""
    if r < 0:
        raise BoundInputError("r must be nonnegative")
    return math.pi ** (-r / 2) * math.gamma(1 + r / 2)


def g_paren_chain(H: float, G_k: float, k: int) -> tuple[float, ...]:
    """G_(1)..G_(k) from G_(j-1) = H^(1/j) G_(j)^((j-1)/j), seeded with G_(k) = G_k."""
    _positive(H=H, G_k=G_k)
    if k < 1:
        raise BoundInputError("k must be >= 1")
    out = [0.0] * k
    out[k - 1] = G_k
    for j in range(k, 1, -1):
        out[j - 2] = H ** (1.0 / j) * out[j - 1] ** ((j - 1) / j)
    return tuple(out)


def theorem1_bound(inp: BoundInputs, cfg: ConstantsConfig) -> float:
    n, r, H, L = inp.n, inp.r, inp.H, inp.L
    G1 = inp.paren(1)
    _positive(H=H, L=L, G_paren_1=G1)
    if not 1 <= r <= n:
        raise BoundInputError(f"need 1 <= r <= n, got r={r}, n={n}")
    wp = r * r * math.log(h(G1) * h(H) * h(L))
    return (cfg.F_charts * cfg.T0 * 2.0 ** (r + 3) * float(r) ** (3 * r) * c0(r) ** 2
            * math.comb(n * r, r) ** 0.5 * math.comb(n, r) ** 1.5
            * H / G1 * wp ** r)


def _theorem23(inp: BoundInputs, cfg: ConstantsConfig, k: int, G_power: float) -> float:
    n, r, H, L = inp.n, inp.r, inp.H, inp.L
    if k < 1:
        raise BoundInputError("k must be >= 1")
    if not 1 <= r <= n:
        raise BoundInputError(f"need 1 <= r <= n, got r={r}, n={n}")
    parens = [inp.paren(j) for j in range(1, k + 1)]
    _positive(H=H, L=L, G=G_power, **{f"G_paren_{j + 1}": g for j, g in enumerate(parens)})
    H_t = max([h(H), h(L)] + [h(g) for g in parens])
    phi = 3.0 * r * r * math.log(H_t)
    return (c0(r) ** 2 * (1.0 + 4.0 * float(n) ** r * cfg.c_n) ** (k - 1) * 2.0 ** (r + 3)
            * float(n * r * r) ** (2 * r) * cfg.F_charts * cfg.T0
            * H ** (1.0 / k) * G_power ** (-1.0 / k) * phi ** r)


def theorem2_bound(inp: BoundInputs, cfg: ConstantsConfig, k: int | None = None) -> float:
    k = inp.k if k is None else k
    return _theorem23(inp, cfg, k, inp.paren(k))


def theorem3_bound(inp: BoundInputs, cfg: ConstantsConfig, k: int | None = None) -> float:
    k = inp.k if k is None else k
    return _theorem23(inp, cfg, k, inp.level(k))


def theorem4_cases(k: int, r: int) -> tuple[str, ...]:
    """Cases whose (k, r) condition holds; at k == r both forms are admitted."""
    cases = []
    if k >= r:
        cases.append("k_ge_r")
    if k <= r:
        cases.append("k_lt_r_a")
        if r > 1:
            cases.append("k_lt_r_b")
    return tuple(cases)


def theorem4_L0(inp: BoundInputs) -> float:
    Gk1 = inp.level(inp.k - 1)
    _positive(L=inp.L, H_tilde=inp.H_tilde, H_1=inp.H_1, G_k_minus_1=Gk1)
    return max(inp.L, 1.0 / inp.L, inp.H_tilde, 1.0 / inp.H_1, Gk1, 1.0 / Gk1)


def theorem4_bound(case: str, inp: BoundInputs, cfg: ConstantsConfig) -> float:
    k, r = inp.k, inp.r
    if case not in THEOREM4_CASES:
        raise BoundInputError(f"unknown theorem4 case {case!r}")
    if k <= 1:
        raise BoundInputError("k-1 division undefined: theorem4_bound needs k >= 2")
    if case == "k_ge_r" and k < r:
        raise BoundInputError(f"case k_ge_r needs k >= r (k={k}, r={r})")
    if case != "k_ge_r" and k > r:
        raise BoundInputError(f"case {case} needs k <= r (k={k}, r={r})")
    if case == "k_lt_r_b" and r <= 1:
        raise BoundInputError("r-1 division undefined: case k_lt_r_b needs r >= 2")
    Gk1 = inp.level(k - 1)
    L0 = theorem4_L0(inp)
    logf = math.log(L0 + 1.0 / L0)
    if case == "k_ge_r":
        _positive(G_det=inp.G_det)
        return (cfg.c1 * cfg.K * inp.G_det ** ((r - k) / (k * (k - 1)))
                * Gk1 ** (r / (k * (k - 1))) * logf ** (r - 1))
    if case == "k_lt_r_a":
        return (cfg.c2 * cfg.K * inp.H_tilde ** ((r - k) / (k - 1))
                * Gk1 ** (-1.0 / (k - 1)) * logf ** (r + 1))
    _positive(Pi_area=inp.Pi_area)
    return (cfg.c3 * cfg.K * inp.Pi_area ** ((r - k) / (k - 1))
            * Gk1 ** (-1.0 / (r - 1)) * logf ** (r - 1))


def consequence_bound(lam: float, r: int, H_tilde_h: float, cfg: ConstantsConfig) -> float:
    """c_4 K λ^-1 ℘^(r+1) with ℘ = 3 r^2 log H̃, H̃ an h-value (>= 2)."""
    _positive(lam=lam)
    if H_tilde_h < 2.0:
        raise BoundInputError("the log argument must be an h-value (>= 2)")
    wp = 3.0 * r * r * math.log(H_tilde_h)
    return cfg.c4 * cfg.K / lam * wp ** (r + 1)


def consequence_lambda(chain: DerivativeChain, domain: BoxDomain, k: int, r: int,
                       cfg: ConstantsConfig | None = None, resolution: int | None = None,
                       refine_rounds: int = 3) -> tuple[float, float]:
    """λ from minimal singular values of the chain, and the resulting bound.

    k <= r: λ = min over Ω of λ_1 + ... + λ_r, λ_i the smallest singular value of A_{i-1}.
    k >  r: λ = min over Ω of λ_k^(r/k), λ_k the smallest singular value of A_{k-1}.
    """
    cfg = cfg or ConstantsConfig()
    if k < 1 or r < 1:
        raise BoundInputError("k and r must be >= 1")
    need = r - 1 if k <= r else k - 1
    if chain.depth < need:
        raise BoundInputError(f"chain depth {chain.depth} < {need} required for (k={k}, r={r})")
    if k <= r:
        fields_ = [min_singular_field(chain[i]) for i in range(r)]
        field = lambda pts: np.sum([f(pts) for f in fields_], axis=0)
    else:
        base = min_singular_field(chain[k - 1])
        field = lambda pts: base(pts) ** (r / k)
    lam = box_extremum(field, domain, resolution, refine_rounds).value
    if not lam > 0:
        raise BoundInputError("λ = 0 at the sampled minimum; the bound is undefined")
    L = max(box_extremum(frobenius_field(m), domain, resolution, refine_rounds, maximize=True).value
            for m in chain.matrices[:need + 1])
    H_t = max(h(x) for x in (L, lam) if x > 0)
    return lam, consequence_bound(lam, r, H_t, cfg)
