import math

import numpy as np
import pytest

from oscbound.errors import DimensionError, UnsupportedGeometryError
from oscbound.measure import (SurfaceSystem, dyadic_shell_measures, gradient_norm_field,
                              marching_squares, max_level_area, sublevel_measure, sublevel_measures,
                              surface_measure)
from oscbound.poly import BoxDomain, parse_polynomial
from oscbound.sampling import stratified_sample


def P(s, n=2):
    return parse_polynomial(s, n)


def test_quarter_disk_volume():
    g0 = gradient_norm_field(P("(x0^2 + x1^2)/2"))   # |grad| = |x|
    est = sublevel_measure(g0, BoxDomain.unit(2), 1.0, samples=1_000_000, seed=0)
    assert abs(est.value - math.pi / 4) <= 3 * est.std_error
    assert est.std_error < 1e-3


def test_sublevel_monotone_in_H():
    g0 = gradient_norm_field(P("x0^3 + x1^2"))
    vals = [e.value for e in sublevel_measures(g0, BoxDomain.unit(2), [0.2, 0.5, 1.0, 2.0, 5.0], samples=20_000)]
    assert vals == sorted(vals)
    assert vals[-1] == 1.0


def test_shells_are_disjoint():
    d = BoxDomain.unit(2)
    g0 = gradient_norm_field(P("x0*x1"))
    smp = stratified_sample(d, 50_000, 2)
    shells = dyadic_shell_measures(g0, d, 1.0, 5, sample=smp)
    vals = smp.map(g0)
    direct, _ = smp.estimate((vals >= 1.0 / 32) & (vals < 1.0))
    assert math.fsum(s.value for s in shells) == pytest.approx(direct, abs=1e-12)


def test_line_and_quarter_circle():
    d = BoxDomain.unit(2)
    line = surface_measure(SurfaceSystem((P("x0 - x1"),), d), resolution=512)
    assert line.value == pytest.approx(math.sqrt(2), abs=1e-3)
    circle = surface_measure(SurfaceSystem((P("x0^2 + x1^2 - 1"),), d), resolution=512)
    assert circle.value == pytest.approx(math.pi / 2, abs=1e-3)
    assert circle.std_error < 1e-4


def test_restricted_chord():
    # points of x0 + x1 = 1 with |x| <= H form a chord of half-length sqrt(H^2 - 1/2)
    d = BoxDomain.unit(2)
    g0 = gradient_norm_field(P("(x0^2 + x1^2)/2"))
    est = surface_measure(SurfaceSystem((P("x0 + x1 - 1"),), d), g0, 0.9, resolution=512)
    assert est.value == pytest.approx(2 * math.sqrt(0.81 - 0.5), abs=5e-3)


def test_sphere_octant_area():
    d = BoxDomain.unit(3)
    est = surface_measure(SurfaceSystem((P("x0^2 + x1^2 + x2^2 - 1", 3),), d), resolution=64)
    assert est.value == pytest.approx(math.pi / 2, rel=5e-3)


def test_degenerate_segments_are_skipped():
    est = surface_measure(SurfaceSystem((P("(x0 - 0.5)^3"),), BoxDomain.unit(2)), resolution=64)
    assert est.skipped > 0
    assert est.value == 0.0


def test_marching_squares_single_cell():
    segs = marching_squares(np.array([[-1.0, 1.0], [-1.0, 1.0]]), np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    assert segs.shape == (1, 2, 2)
    np.testing.assert_allclose(sorted(segs[0].tolist()), [[0.0, 0.5], [1.0, 0.5]])


def test_level_area_and_errors():
    area, u = max_level_area(P("x0"), BoxDomain.unit(2), [0.25, 0.5], resolution=64)
    assert area == pytest.approx(1.0)
    with pytest.raises(UnsupportedGeometryError):
        surface_measure(SurfaceSystem((P("x0", 1),), BoxDomain.unit(1)))
    with pytest.raises(DimensionError):
        SurfaceSystem((P("x0"), P("x1"), P("x0*x1")), BoxDomain.unit(2))
