"""Reference values of I = ∫_Ω exp(2πi t F(x)) dx for n <= 3.

The adaptive path bisects intervals until a 20-point Gauss-Legendre rule on
the whole interval agrees with the same rule applied to both halves.  Many
independent 1-D problems are advanced together as flat arrays, which is what
makes the iterated (outer x inner) scheme affordable in numpy.  For n >= 2 a
randomized Sobol estimate is computed as an independent cross-check and the
reported error is the larger of the two discrepancies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import FitUndefinedError
from .poly import BoxDomain, Polynomial

GL_ORDER = 20
INITIAL_PIECES = 4
MAX_LEVELS = 48
DEFAULT_BUDGET = 10_000_000
QMC_LOG2_POINTS = 14
QMC_REPLICATES = 8

_XI, _W = np.polynomial.legendre.leggauss(GL_ORDER)


@dataclass
class _Budget:
    limit: int
    used: int = 0

    @property
    def exhausted(self) -> bool:
        return self.used >= self.limit


@dataclass(frozen=True)
class OracleResult:
    value: complex
    abs_error_estimate: float
    method: str
    evaluations: int
    converged: bool = True
    rule_error: float = 0.0
    qmc_value: complex | None = None
    qmc_error: float | None = None
    details: dict = field(default_factory=dict)


# integrand(x, pid) -> (values, inner_error); both shaped like x
Integrand = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def _rule(integrand: Integrand, a, b, pid):
    half = 0.5 * (b - a)
    x = (0.5 * (a + b))[:, None] + half[:, None] * _XI[None, :]
    vals, errs = integrand(x.ravel(), np.repeat(pid, GL_ORDER))
    vals = vals.reshape(x.shape)
    errs = errs.reshape(x.shape)
    return half * (vals @ _W), half * (errs @ _W)


def adaptive_batch(integrand: Integrand, a0: np.ndarray, b0: np.ndarray, tol: float,
                   budget: _Budget) -> tuple[np.ndarray, np.ndarray, bool]:
    """Integrate ``len(a0)`` problems at once; returns values, error estimates, converged."""
    P = len(a0)
    edges = np.linspace(0.0, 1.0, INITIAL_PIECES + 1)
    a = (a0[:, None] + (b0 - a0)[:, None] * edges[None, :-1]).ravel()
    b = (a0[:, None] + (b0 - a0)[:, None] * edges[None, 1:]).ravel()
    pid = np.repeat(np.arange(P), INITIAL_PIECES)
    whole, whole_err = _rule(integrand, a, b, pid)
    total = np.zeros(P, dtype=np.complex128)
    error = np.zeros(P)
    span = (b0 - a0)
    converged = True
    for level in range(MAX_LEVELS + 1):
        if not len(a):
            break
        mid = 0.5 * (a + b)
        left, left_err = _rule(integrand, a, mid, pid)
        right, right_err = _rule(integrand, mid, b, pid)
        est = left + right
        disc = np.abs(whole - est)
        local_tol = tol * (b - a) / span[pid]
        accept = disc <= local_tol
        if level == MAX_LEVELS or budget.exhausted:
            if not accept.all():
                converged = False
            accept[:] = True
        np.add.at(total, pid[accept], est[accept])
        np.add.at(error, pid[accept], disc[accept] + left_err[accept] + right_err[accept])
        keep = ~accept
        a = np.concatenate([a[keep], mid[keep]])
        b = np.concatenate([mid[keep], b[keep]])
        pid = np.concatenate([pid[keep], pid[keep]])
        whole = np.concatenate([left[keep], right[keep]])
    return total, error, converged


class _Iterated:
    """exp(2πi t F) integrated one coordinate at a time, outermost first."""

    def __init__(self, f: Polynomial, domain: BoxDomain, scale: float, tol: float, budget: _Budget):
        self.f = f
        self.domain = domain
        self.scale = scale
        self.tol = tol
        self.budget = budget
        self.converged = True
        self.n = domain.num_vars

    def phase(self, pts: np.ndarray) -> np.ndarray:
        self.budget.used += pts.shape[0]
        vals = np.exp(2j * np.pi * self.scale * self.f.evaluate_many(pts))
        if self.domain.constraints:
            vals = vals * self.domain.admits(pts)
        return vals

    def integrate(self, prefix: np.ndarray, tol: float):
        """Integrals over coordinates d..n-1 for each row of ``prefix`` (shape (P, d))."""
        d = prefix.shape[1]
        P = prefix.shape[0]
        lo, hi = self.domain.lower[d], self.domain.upper[d]
        last = d == self.n - 1
        inner_tol = 0.5 * tol / (hi - lo)

        def integrand(x, pid):
            pts = np.concatenate([prefix[pid], x[:, None]], axis=1)
            if last:
                return self.phase(pts), np.zeros(len(x))
            return self.integrate(pts, inner_tol)

        rule_tol = tol if last else 0.5 * tol
        val, err, ok = adaptive_batch(integrand, np.full(P, lo), np.full(P, hi), rule_tol, self.budget)
        self.converged &= ok
        return val, err


def qmc_estimate(f: Polynomial, domain: BoxDomain, scale: float = 1.0, seed: int = 0,
                 log2_points: int = QMC_LOG2_POINTS, replicates: int = QMC_REPLICATES):
    """Randomized Sobol mean over independent scramblings; returns (value, std error, evals)."""
    n = domain.num_vars
    seeds = np.random.SeedSequence(seed).spawn(replicates)
    lower, widths = np.asarray(domain.lower), domain.widths
    estimates = []
    for ss in seeds:
        u = qmc.Sobol(d=n, scramble=True, seed=np.random.default_rng(ss)).random_base2(log2_points)
        pts = lower + u * widths
        vals = np.exp(2j * np.pi * scale * f.evaluate_many(pts))
        if domain.constraints:
            vals = vals * domain.admits(pts)
        estimates.append(domain.box_volume * vals.mean())
    est = np.array(estimates)
    spread = np.sqrt(np.var(est.real, ddof=1) + np.var(est.imag, ddof=1))
    return complex(est.mean()), float(spread / np.sqrt(replicates)), replicates << log2_points


def oscillatory_integral(f: Polynomial, domain: BoxDomain, target_error: float = 1e-10,
                         scale: float = 1.0, budget: int = DEFAULT_BUDGET, seed: int = 0) -> OracleResult:
    """∫_domain exp(2πi·scale·F(x)) dx with an honest error estimate."""
    n = domain.num_vars
    if n > 3:
        raise ValueError("the oracle supports n <= 3")
    if target_error <= 0:
        raise ValueError("target_error must be positive")
    bud = _Budget(budget)
    it = _Iterated(f, domain, scale, target_error, bud)
    val, err = it.integrate(np.empty((1, 0)), target_error)
    value, rule_err = complex(val[0]), float(err[0])
    if n == 1:
        result = OracleResult(value, rule_err, "adaptive", bud.used, it.converged, rule_err)
    else:
        qv, qe, qn = qmc_estimate(f, domain, scale, seed)
        abs_err = max(rule_err, abs(value - qv))
        result = OracleResult(value, abs_err, "adaptive", bud.used + qn, it.converged, rule_err, qv, qe)
    vol = domain.box_volume
    assert abs(result.value) <= vol + result.abs_error_estimate + 1e-12, "modulus bound violated"
    return result


@dataclass(frozen=True)
class DecayFit:
    slope: float
    residual: float
    t: tuple[float, ...]
    abs_I: tuple[float, ...]
    errors: tuple[float, ...]
    used: tuple[bool, ...]


def decay_fit(f: Polynomial, domain: BoxDomain, t_grid: Sequence[float], target_error: float = 1e-10,
              budget: int = DEFAULT_BUDGET, seed: int = 0) -> DecayFit:
    """Least-squares slope of log|I(t)| against log t for the phase t·F."""
    t = np.asarray([x for x in t_grid if x > 0], dtype=np.float64)
    if len(t) < 5 or t.max() / t.min() < 100.0:
        raise ValueError("t_grid needs >= 5 positive points spanning >= 2 decades")
    results = [oscillatory_integral(f, domain, target_error, float(s), budget, seed) for s in t]
    mags = np.array([abs(r.value) for r in results])
    errs = np.array([r.abs_error_estimate for r in results])
    used = mags > 10.0 * errs
    if used.sum() < 2:
        raise FitUndefinedError("fewer than two values of |I(t)| rise above the error floor")
    x, y = np.log(t[used]), np.log(mags[used])
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    return DecayFit(float(coef[0]), float(np.sqrt(np.mean(resid ** 2))), tuple(t.tolist()),
                    tuple(mags.tolist()), tuple(errs.tolist()), tuple(bool(u) for u in used))
