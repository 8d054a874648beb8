import numpy as np
import pytest

from oscbound.errors import EmptyDomainError
from oscbound.poly import BoxDomain, parse_polynomial
from oscbound.sampling import counter_uniforms, strata_per_axis, stratified_sample
from oscbound.search import box_extremum, grid_points


def test_counter_blocks_are_position_keyed():
    whole = counter_uniforms(7, 0, 100, 3)
    np.testing.assert_array_equal(whole[37:], counter_uniforms(7, 37, 63, 3))
    assert whole.min() >= 0.0 and whole.max() < 1.0
    assert not np.array_equal(whole, counter_uniforms(8, 0, 100, 3))


def test_worker_count_does_not_change_samples():
    d = BoxDomain((0, -1), (2, 1))
    a = stratified_sample(d, 200_000, 3, workers=1)
    b = stratified_sample(d, 200_000, 3, workers=4)
    np.testing.assert_array_equal(a.points, b.points)
    f = parse_polynomial("x0*x1", 2).evaluate_many
    np.testing.assert_array_equal(a.map(f), b.map(f))


def test_strata_cover_box():
    d = BoxDomain.unit(2)
    s = stratified_sample(d, 6400, 0)
    assert strata_per_axis(2, 6400) == 8
    assert np.all(s.per_stratum == 100)
    cells = np.floor(s.points * 8).astype(int)
    np.testing.assert_array_equal(cells[:, 0] * 8 + cells[:, 1], s.strata)
    assert s.admissible_volume() == (1.0, 0.0)


def test_constrained_volume():
    d = BoxDomain((0, 0), (1, 1), ((parse_polynomial("x0 + x1 - 1", 2), "<=0"),))
    v, se = stratified_sample(d, 100_000, 1).admissible_volume()
    assert abs(v - 0.5) < 3 * se + 1e-3


def test_grid_nesting_and_monotone_refinement():
    d = BoxDomain((-1, 0), (1, 2))
    coarse = {tuple(p) for p in grid_points(d, 8).round(12)}
    fine = {tuple(p) for p in grid_points(d, 16).round(12)}
    assert coarse <= fine
    f = parse_polynomial("x0^3 - x0*x1 + x1^2/3", 2).evaluate_many
    vals = [box_extremum(f, d, r, refine_rounds=0).value for r in (4, 8, 16, 32, 64)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_refinement_reaches_interior_minimum():
    f = parse_polynomial("(x0 - 0.3137)^2 + (x1 - 0.7071)^2", 2).evaluate_many
    ext = box_extremum(f, BoxDomain.unit(2), 16)
    assert ext.value < 1e-6
    assert ext.point == pytest.approx((0.3137, 0.7071), abs=1e-3)


def test_ties_break_lexicographically():
    ext = box_extremum(lambda p: np.zeros(len(p)), BoxDomain((1, 2), (3, 4)), 8, maximize=True)
    assert ext.point == (1.0, 2.0)


def test_empty_constrained_grid():
    d = BoxDomain((0,), (1,), ((parse_polynomial("x0 + 1", 1), "<=0"),))
    with pytest.raises(EmptyDomainError):
        box_extremum(lambda p: p[:, 0], d, 8)
