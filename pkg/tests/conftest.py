import pytest

from oscbound.poly import BoxDomain, parse_polynomial

CORPUS = ("x0 + x1", "x0*x1", "x0^2 + x1^2", "x0^2 - x1^2", "x0^3 + x1^2")


@pytest.fixture
def unit2():
    return BoxDomain.unit(2)


@pytest.fixture
def shifted2():
    return BoxDomain((1.0, 1.0), (2.0, 2.0))


def corpus_polys():
    return [parse_polynomial(s, 2) for s in CORPUS]
