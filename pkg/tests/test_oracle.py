import cmath
import math

import numpy as np
import pytest
from scipy.special import sici

from oscbound.errors import FitUndefinedError
from oscbound.oracle import decay_fit, oscillatory_integral, qmc_estimate
from oscbound.poly import BoxDomain, parse_polynomial


def fresnel_series(z, terms=80):
    """C(z), S(z) from their power series, summed with fsum."""
    a = math.pi / 2
    c = math.fsum((-1) ** n * a ** (2 * n) * z ** (4 * n + 1) / (math.factorial(2 * n) * (4 * n + 1))
                  for n in range(terms))
    s = math.fsum((-1) ** n * a ** (2 * n + 1) * z ** (4 * n + 3) / (math.factorial(2 * n + 1) * (4 * n + 3))
                  for n in range(terms))
    return c, s


@pytest.mark.parametrize("t", [0.5, 1.0, 1.5, 3.5, 12.25])
def test_linear_phase(t):
    res = oscillatory_integral(parse_polynomial("x0", 1), BoxDomain.unit(1), 1e-12, scale=t)
    exact = (cmath.exp(2j * math.pi * t) - 1) / (2j * math.pi * t)
    assert abs(res.value - exact) < 1e-12
    assert res.converged


def test_fresnel():
    c, s = fresnel_series(2.0)
    res = oscillatory_integral(parse_polynomial("x0^2", 1), BoxDomain.unit(1), 1e-12)
    assert abs(res.value - 0.5 * complex(c, s)) < 1e-11


def test_product_phase_sici():
    si, ci = sici(2 * math.pi)
    gamma = 0.5772156649015329
    exact = complex(si, -(ci - gamma - math.log(2 * math.pi))) / (2 * math.pi)
    res = oscillatory_integral(parse_polynomial("x0*x1", 2), BoxDomain.unit(2), 1e-10)
    assert abs(res.value - exact) < 1e-9
    assert abs(res.qmc_value - exact) < 5 * res.qmc_error + 1e-6
    assert res.abs_error_estimate >= abs(res.value - res.qmc_value)


def test_separable_3d():
    res = oscillatory_integral(parse_polynomial("x0 + x1 + x2", 3), BoxDomain.unit(3), 1e-9, scale=0.5)
    assert abs(res.value - (-8j / math.pi ** 3)) < 1e-9


def test_constrained_triangle():
    # area of the triangle x0 + x1 <= 1 with a zero phase
    d = BoxDomain((0, 0), (1, 1), ((parse_polynomial("x0 + x1 - 1", 2), "<=0"),))
    res = oscillatory_integral(parse_polynomial("0", 2), d, 1e-6, budget=2_000_000)
    assert abs(res.value - 0.5) < 5e-3


def test_qmc_is_seeded():
    f, d = parse_polynomial("x0^2 - x1", 2), BoxDomain.unit(2)
    assert qmc_estimate(f, d, seed=3) == qmc_estimate(f, d, seed=3)


def test_modulus_bound_and_budget():
    res = oscillatory_integral(parse_polynomial("x0^3*x1", 2), BoxDomain.unit(2), 1e-10, scale=40.0, budget=20_000)
    assert not res.converged
    assert abs(res.value) <= 1 + res.abs_error_estimate


@pytest.mark.parametrize("k", [2, 3, 4])
def test_decay_slopes(k):
    fit = decay_fit(parse_polynomial(f"x0^{k}", 1), BoxDomain.unit(1), np.geomspace(10, 1e4, 25))
    assert fit.slope == pytest.approx(-1 / k, abs=0.05)


def test_decay_grid_checks():
    f, d = parse_polynomial("x0^2", 1), BoxDomain.unit(1)
    with pytest.raises(ValueError):
        decay_fit(f, d, [1, 2, 3, 4, 5])
    with pytest.raises(FitUndefinedError):
        decay_fit(parse_polynomial("x0", 1), d, [10, 20, 50, 100, 200, 500, 1000])
