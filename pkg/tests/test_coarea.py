import numpy as np
import pytest

from oscbound.coarea import level_profile, monotone_split, oscillatory_from_profile, profile_rows
from oscbound.errors import DegenerateProfileError
from oscbound.poly import BoxDomain, parse_polynomial


@pytest.fixture(scope="module")
def tent():
    # F = x0 + x1 on the unit square: phi(u) = u on [0,1], 2 - u on [1,2]
    return level_profile(parse_polynomial("x0 + x1", 2), BoxDomain.unit(2), 256, 400_000, seed=5)


def test_tent_profile(tent):
    inside = (tent.u_grid > 0.05) & (tent.u_grid < 1.95)
    exact = np.minimum(tent.u_grid, 2 - tent.u_grid)
    assert np.max(np.abs(tent.phi - exact)[inside]) < 5 * tent.noise_scale
    assert tent.normalization() == pytest.approx(1.0, abs=5 * tent.noise_scale)
    assert tent.m < 0 < 2 < tent.M


def test_tent_pieces(tent):
    pieces = monotone_split(tent)
    assert pieces.count == 2
    assert pieces.directions == ("nondecreasing", "nonincreasing")
    assert tent.u_grid[pieces.breakpoints[1]] == pytest.approx(1.0, abs=0.05)


def test_tent_integral(tent):
    # the exact integral is (int_0^1 e^{2 pi i x} dx)^2 = 0
    assert abs(oscillatory_from_profile(tent)) < 10 * tent.noise_scale + 1 / 256


def test_split_synthetic():
    assert monotone_split(np.array([0, 1, 2, 3, 2, 1, 2, 3.0])).count == 3
    noisy = np.array([0, 1, 0.95, 2, 3, 2.9, 4.0])
    assert monotone_split(noisy, 0.2).count == 1
    assert monotone_split(noisy).count > 1
    with pytest.raises(ValueError):
        monotone_split(noisy, -1.0)


def test_piece_index_and_rows(tent):
    pieces = monotone_split(tent)
    rows = profile_rows(tent, pieces)
    idx = [r[3] for r in rows]
    assert len(rows) == 256 and idx == sorted(idx)


def test_degenerate_and_warning():
    with pytest.raises(DegenerateProfileError):
        level_profile(parse_polynomial("3", 2), BoxDomain.unit(2), 64, 1000)
    with pytest.warns(RuntimeWarning):
        level_profile(parse_polynomial("x0*x1", 2), BoxDomain.unit(2), 64, 1000)
