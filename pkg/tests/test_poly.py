from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oscbound.errors import DimensionError, EmptyDomainError, PolynomialSyntaxError
from oscbound.poly import (BoxDomain, Polynomial, evaluate, format_polynomial, gradient,
                           parse_polynomial, partial_derivative, polynomial_from_records,
                           polynomial_to_records)

coeffs = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def polys(draw, n=2, max_terms=5, max_exp=4):
    terms = draw(st.dictionaries(st.tuples(*[st.integers(0, max_exp)] * n), coeffs, max_size=max_terms))
    return Polynomial(n, terms)


def test_canonical_terms_and_degree():
    p = parse_polynomial("2*x0^3 - x1", 2)
    assert dict(p.terms) == {(3, 0): Fraction(2), (0, 1): Fraction(-1)}
    assert p.degree == 3
    assert parse_polynomial("x0 - x0", 2).is_zero()


def test_parser_operators():
    p = parse_polynomial("(x0 + 1)**2 / 4 - 0.5*x1 + 3/2", 2)
    expected = Polynomial(2, {(2, 0): Fraction(1, 4), (1, 0): Fraction(1, 2), (0, 0): Fraction(7, 4),
                              (0, 1): Fraction(-1, 2)})
    assert p == expected


@pytest.mark.parametrize("text,pos", [("x0 + x2", 5), ("x0^-1", 3), ("x0 / x1", 3), ("x0 +", 4), ("x0 $ 1", 3)])
def test_syntax_errors_carry_position(text, pos):
    with pytest.raises(PolynomialSyntaxError) as err:
        parse_polynomial(text, 2)
    assert err.value.position == pos


def test_exact_derivative():
    p = parse_polynomial("3*x0^2*x1 - x1^3", 2)
    assert partial_derivative(p, 0) == parse_polynomial("6*x0*x1", 2)
    assert gradient(p)[1] == parse_polynomial("3*x0^2 - 3*x1^2", 2)


def test_exact_point_evaluation():
    # 0.1 is not exact in binary; exact evaluation rounds only once
    p = parse_polynomial("x0^2 - 2*x0*x1 + x1^2", 2)
    x, y = 0.1, 0.3
    exact = (Fraction(x) - Fraction(y)) ** 2
    assert evaluate(p, (x, y)) == float(exact)


def test_format_example():
    p = parse_polynomial("3/4*x0^2*x1 - x1^2 + x0/2 - 2*x1 - 1", 2)
    assert format_polynomial(p) == "3/4*x0^2*x1 - x1^2 + 1/2*x0 - 2*x1 - 1"
    assert format_polynomial(Polynomial(2)) == "0"


def test_records_round_trip():
    p = parse_polynomial("x0^2/3 - 5", 2)
    assert polynomial_from_records(polynomial_to_records(p), 2) == p
    with pytest.raises(DimensionError):
        polynomial_from_records([{"coeff": "1", "exps": [1]}], 2)


@settings(max_examples=60, deadline=None)
@given(polys())
def test_format_parse_round_trip(p):
    assert parse_polynomial(format_polynomial(p), 2) == p


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), coeffs)
def test_derivative_linear(p, q, a):
    lhs = partial_derivative(p * a + q, 1)
    assert lhs == partial_derivative(p, 1) * a + partial_derivative(q, 1)


@settings(max_examples=40, deadline=None)
@given(polys(), st.tuples(st.floats(-1, 1), st.floats(-1, 1)))
def test_derivative_matches_finite_difference(p, pt):
    h = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (p.evaluate_many([np.add(pt, e)])[0] - p.evaluate_many([np.subtract(pt, e)])[0]) / (2 * h)
        exact = partial_derivative(p, i).evaluate(pt)
        scale = 1 + sum(abs(float(c)) for c in p.terms.values()) * 16
        assert abs(fd - exact) <= 1e-6 * scale


@settings(max_examples=40, deadline=None)
@given(polys(), st.tuples(st.floats(-2, 2), st.floats(-2, 2)))
def test_vectorized_matches_exact(p, pt):
    fast = p.evaluate_many(np.array([pt]))[0]
    exact = p.evaluate(pt)
    assert fast == pytest.approx(exact, rel=1e-12, abs=1e-12 * (1 + sum(abs(float(c)) for c in p.terms.values()) * 16))


def test_box_domain():
    d = BoxDomain((0, 0), (1, 2), ((parse_polynomial("x0 + x1 - 1", 2), "<=0"),))
    assert d.box_volume == 2.0
    assert d.admits([[0.2, 0.2], [0.8, 0.8], [1.5, 0.0]]).tolist() == [True, False, False]
    with pytest.raises(EmptyDomainError):
        BoxDomain((0,), (0,))
    with pytest.raises(DimensionError):
        BoxDomain((0, 0), (1, 1), ((parse_polynomial("x0", 1), "<=0"),))
