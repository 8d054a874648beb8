import numpy as np
import pytest

from oscbound.chain import (PolyMatrix, build_chain, expected_columns, gradient_seed, next_matrix)
from oscbound.errors import ChainTooLarge
from oscbound.poly import parse_polynomial


def P(s, n=2):
    return parse_polynomial(s, n)


def test_product_chain_entries():
    ch = build_chain(gradient_seed(P("x0*x1")), 2)
    assert ch[0].entries == ((P("x1"), P("x0")),)
    assert ch[1].entries == ((P("0"), P("1")), (P("1"), P("0")))
    assert ch[2].shape == (2, 4)
    assert all(p.is_zero() for row in ch[2].entries for p in row)


@pytest.mark.parametrize("n,k", [(1, 4), (2, 3), (3, 3)])
def test_shapes(n, k):
    f = P(" + ".join(f"x{i}^4" for i in range(n)) + " + x0*x" + str(n - 1), n)
    ch = build_chain(gradient_seed(f), k)
    for j in range(k + 1):
        rows = 1 if j == 0 else n
        assert ch[j].shape == (rows, expected_columns(n, 1, n, j))
        assert ch[j].cols == n ** max(j, 1)


def test_column_major_flattening():
    a = PolyMatrix.from_rows([[P("x0"), P("x1^2")], [P("x0*x1"), P("1")]])
    nxt = next_matrix(a)
    # flattened order: x0, x0*x1, x1^2, 1
    assert nxt.entries[1] == (P("0"), P("x0"), P("2*x1"), P("0"))


def test_chain_is_jacobian_of_previous():
    f = P("x0^3*x1 - 2*x1^2*x0 + x0")
    ch = build_chain(gradient_seed(f), 2)
    x = np.array([0.3, -0.7])
    h = 1e-6
    flat = lambda p: ch[1].evaluate(p).flatten(order="F")
    a2 = ch[2].evaluate(x)
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        np.testing.assert_allclose((flat(x + e) - flat(x - e)) / (2 * h), a2[i], atol=1e-7)


def test_column_cap():
    with pytest.raises(ChainTooLarge):
        build_chain(gradient_seed(P("x0*x1*x2", 3)), 9, column_cap=10_000)
