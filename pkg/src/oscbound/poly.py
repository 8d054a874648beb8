"""Exact multivariate polynomials over the rationals, and box domains.

A polynomial in ``n`` variables ``x0 .. x{n-1}`` is a mapping from dense
exponent tuples to :class:`fractions.Fraction` coefficients.  Zero
coefficients are never stored, so the zero polynomial is the empty map.

Example (n = 2)::

    2*x0^3 - x1   ->   {(3, 0): Fraction(2), (0, 1): Fraction(-1)}

Derivatives are exact.  Point evaluation is exact too (floats convert to
rationals without loss) and rounds once at the end; :meth:`Polynomial.evaluate_many`
is the vectorized float64 path used by the samplers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, EmptyDomainError, PolynomialSyntaxError

Exponent = tuple[int, ...]


class Polynomial:
    """Immutable sparse polynomial with rational coefficients."""

    __slots__ = ("_n", "_terms", "_compiled", "_hash")

    def __init__(self, num_vars: int, terms: Mapping[Sequence[int], object] | None = None):
        if not isinstance(num_vars, int) or num_vars < 1:
            raise DimensionError(f"num_vars must be a positive integer, got {num_vars!r}")
        merged: dict[Exponent, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            key = tuple(int(e) for e in exps)
            if len(key) != num_vars:
                raise DimensionError(f"exponent {key} has length {len(key)}, expected {num_vars}")
            if any(e < 0 for e in key):
                raise ValueError(f"negative exponent in {key}")
            merged[key] = merged.get(key, Fraction(0)) + Fraction(coeff)
        self._n = num_vars
        self._terms = {k: v for k, v in sorted(merged.items()) if v != 0}
        self._compiled = None
        self._hash = None

    @classmethod
    def constant(cls, num_vars: int, value) -> "Polynomial":
        return cls(num_vars, {(0,) * num_vars: value})

    @classmethod
    def variable(cls, num_vars: int, index: int) -> "Polynomial":
        if not 0 <= index < num_vars:
            raise DimensionError(f"variable index {index} out of range for n={num_vars}")
        exps = [0] * num_vars
        exps[index] = 1
        return cls(num_vars, {tuple(exps): 1})

    @property
    def num_vars(self) -> int:
        return self._n

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return MappingProxyType(self._terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other._n != self._n:
                raise DimensionError(f"cannot combine polynomials in {self._n} and {other._n} variables")
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self._n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for k, v in other._terms.items():
            terms[k] = terms.get(k, Fraction(0)) + v
        return Polynomial(self._n, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self._n, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: dict[Exponent, Fraction] = {}
        for ka, va in self._terms.items():
            for kb, vb in other._terms.items():
                key = tuple(a + b for a, b in zip(ka, kb))
                terms[key] = terms.get(key, Fraction(0)) + va * vb
        return Polynomial(self._n, terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = Polynomial.constant(self._n, 1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._n, tuple(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"Polynomial({self._n}, {format_polynomial(self)!r})"

    def __str__(self):
        return format_polynomial(self)

    # -- calculus ---------------------------------------------------------

    def partial_derivative(self, i: int) -> "Polynomial":
        if not 0 <= i < self._n:
            raise DimensionError(f"variable index {i} out of range for n={self._n}")
        terms = {}
        for exps, c in self._terms.items():
            if exps[i]:
                lowered = exps[:i] + (exps[i] - 1,) + exps[i + 1:]
                terms[lowered] = c * exps[i]
        return Polynomial(self._n, terms)

    def gradient(self) -> tuple["Polynomial", ...]:
        return tuple(self.partial_derivative(i) for i in range(self._n))

    # -- evaluation -------------------------------------------------------

    def evaluate(self, point: Sequence[float]) -> float:
        """Exact evaluation at ``point``, rounded once to a float."""
        if len(point) != self._n:
            raise DimensionError(f"point has {len(point)} coordinates, expected {self._n}")
        xs = [Fraction(float(v)) for v in point]
        total = Fraction(0)
        for exps, c in self._terms.items():
            mono = c
            for x, e in zip(xs, exps):
                if e:
                    mono *= x ** e
            total += mono
        return float(total)

    def _compile(self):
        if self._compiled is None:
            exps = np.array(list(self._terms), dtype=np.int64).reshape(-1, self._n)
            coeffs = np.array([float(c) for c in self._terms.values()], dtype=np.float64)
            self._compiled = (exps, coeffs)
        return self._compiled

    def evaluate_many(self, points) -> np.ndarray:
        """Float64 evaluation at each row of an ``(N, n)`` array."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.shape[1] != self._n:
            raise DimensionError(f"points have {pts.shape[1]} coordinates, expected {self._n}")
        exps, coeffs = self._compile()
        out = np.zeros(pts.shape[0], dtype=np.float64)
        if not len(coeffs):
            return out
        powers = []
        for v in range(self._n):
            top = int(exps[:, v].max())
            table = np.ones((top + 1, pts.shape[0]))
            for e in range(1, top + 1):
                table[e] = table[e - 1] * pts[:, v]
            powers.append(table)
        for t in range(len(coeffs)):
            mono = np.full(pts.shape[0], coeffs[t])
            for v in range(self._n):
                if exps[t, v]:
                    mono = mono * powers[v][exps[t, v]]
            out += mono
        return out


def partial_derivative(p: Polynomial, i: int) -> Polynomial:
    return p.partial_derivative(i)


def gradient(p: Polynomial) -> tuple[Polynomial, ...]:
    return p.gradient()


def evaluate(p: Polynomial, point: Sequence[float]) -> float:
    return p.evaluate(point)


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_polynomial(p: Polynomial) -> str:
    """Render ``p`` in the textual grammar accepted by :func:`parse_polynomial`."""
    if p.is_zero():
        return "0"
    ordered = sorted(p.terms.items(), key=lambda kv: (-sum(kv[0]), tuple(-e for e in kv[0])))
    parts = []
    for idx, (exps, c) in enumerate(ordered):
        factors = [f"x{v}" if e == 1 else f"x{v}^{e}" for v, e in enumerate(exps) if e]
        mag = abs(c)
        if factors and mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_format_coeff(mag)] + factors)
        if idx == 0:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|(x\d+)|(\*\*|[-+*/^()]))")


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m:
                raise PolynomialSyntaxError(f"unexpected character {text[pos:].lstrip()[0]!r}",
                                            len(text) - len(text[pos:].lstrip()))
            start = m.start(m.lastindex)
            kind = ("num", "var", "op")[m.lastindex - 1]
            value = m.group(m.lastindex)
            if value == "**":
                value = "^"
            self.tokens.append((kind, value, start))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("end", None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self) -> Polynomial:
        if not self.tokens:
            raise PolynomialSyntaxError("empty polynomial", 0)
        result = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise PolynomialSyntaxError(f"unexpected token {value!r}", pos)
        return result

    def expr(self):
        acc = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self):
        acc = self.unary()
        while self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            rhs = self.unary()
            if op == "*":
                acc = acc * rhs
            else:
                if not rhs.is_constant() or rhs.is_zero():
                    raise PolynomialSyntaxError("division only by a nonzero constant", pos)
                acc = acc * Polynomial.constant(self.n, 1 / rhs.terms[(0,) * self.n])
        return acc

    def unary(self):
        if self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            inner = self.unary()
            return -inner if op == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, value, pos = self.peek()
            if value == "-":
                raise PolynomialSyntaxError("negative exponent", pos)
            if kind != "num" or not value.isdigit():
                raise PolynomialSyntaxError("exponent must be a nonnegative integer", pos)
            self.take()
            base = base ** int(value)
        return base

    def atom(self):
        kind, value, pos = self.take()
        if kind == "num":
            return Polynomial.constant(self.n, Fraction(value))
        if kind == "var":
            idx = int(value[1:])
            if idx >= self.n:
                raise PolynomialSyntaxError(f"variable {value} not allowed for n={self.n}", pos)
            return Polynomial.variable(self.n, idx)
        if value == "(":
            inner = self.expr()
            kind2, value2, pos2 = self.take()
            if value2 != ")":
                raise PolynomialSyntaxError("expected ')'", pos2)
            return inner
        if kind == "end":
            raise PolynomialSyntaxError("unexpected end of input", pos)
        raise PolynomialSyntaxError(f"unexpected token {value!r}", pos)


def parse_polynomial(doc: str, n: int) -> Polynomial:
    """Parse text such as ``"2*x0^3 - x1/3"`` into a canonical polynomial."""
    return _Parser(doc, n).parse()


def polynomial_from_records(records: Iterable[Mapping], n: int) -> Polynomial:
    """Build a polynomial from ``[{"coeff": "p/q", "exps": [...]}, ...]``."""
    terms: dict[Exponent, Fraction] = {}
    for rec in records:
        exps = tuple(int(e) for e in rec["exps"])
        if len(exps) != n:
            raise DimensionError(f"record exponent {exps} has length {len(exps)}, expected {n}")
        terms[exps] = terms.get(exps, Fraction(0)) + Fraction(str(rec["coeff"]))
    return Polynomial(n, terms)


def polynomial_to_records(p: Polynomial) -> list[dict]:
    return [{"coeff": _format_coeff(c), "exps": list(e)} for e, c in p.terms.items()]


RELATIONS = ("<=0", ">=0")


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box, optionally cut down by polynomial sign constraints."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    constraints: tuple[tuple[Polynomial, str], ...] = field(default=())

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or not lo:
            raise DimensionError("lower and upper must be nonempty and of equal length")
        if any(not a < b for a, b in zip(lo, hi)):
            raise EmptyDomainError(f"box needs lower < upper on every axis, got {lo} / {hi}")
        cons = tuple((p, rel) for p, rel in self.constraints)
        for p, rel in cons:
            if rel not in RELATIONS:
                raise ValueError(f"constraint relation must be one of {RELATIONS}, got {rel!r}")
            if p.num_vars != len(lo):
                raise DimensionError("constraint polynomial dimension does not match the box")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "constraints", cons)

    @classmethod
    def unit(cls, n: int) -> "BoxDomain":
        return cls((0.0,) * n, (1.0,) * n)

    @property
    def num_vars(self) -> int:
        return len(self.lower)

    @property
    def widths(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    @property
    def box_volume(self) -> float:
        return float(np.prod(self.widths))

    def admits(self, points) -> np.ndarray:
        """Boolean mask: rows of ``points`` inside the box and satisfying every constraint."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        mask = np.all((pts >= self.lower) & (pts <= self.upper), axis=1)
        for p, rel in self.constraints:
            vals = p.evaluate_many(pts)
            mask &= (vals <= 0) if rel == "<=0" else (vals >= 0)
        return mask
