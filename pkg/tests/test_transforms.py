import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latticepf.lattice import LatticeRule, korobov_points
from latticepf.transforms import gaussian_step, inv_normal_cdf

mpmath.mp.dps = 30


def ncdf(z):
    return float(mpmath.ncdf(z))


def bisect_quantile(u, tol=1e-12):
    lo, hi = -40.0, 40.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mpmath.ncdf(mid) < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_median():
    assert inv_normal_cdf(0.5) == 0.0


def test_upper_quantile_against_bisection_oracle():
    oracle = bisect_quantile(0.975)
    assert oracle == pytest.approx(1.959964, abs=1e-6)
    assert abs(inv_normal_cdf(0.975) - oracle) < 1e-9


@given(st.integers(1, 2**30 - 1))
def test_antisymmetry(k):
    u = k / 2**31  # dyadic, so 1 - u is exact
    assert inv_normal_cdf(1 - u) == pytest.approx(-inv_normal_cdf(u), rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_domain_error(u):
    with pytest.raises(ValueError):
        inv_normal_cdf(u)


def test_round_trip_and_monotone_on_grid():
    u = np.linspace(1e-7, 1 - 1e-7, 10_000)
    z = inv_normal_cdf(u)
    err = max(abs(ncdf(zi) - ui) for zi, ui in zip(z, u))
    assert err < 1e-9
    assert np.all(np.diff(z) > 0)


def test_gaussian_step_examples():
    np.testing.assert_array_equal(gaussian_step([0.5, 0.5], [1, 2], [3, 3]), [1, 2])
    out = gaussian_step([0.975, 0.5], [0, 0], [1, 1])
    assert out[0] == pytest.approx(bisect_quantile(0.975), abs=1e-9)
    assert out[1] == 0.0


def test_gaussian_step_moments():
    rng = np.random.default_rng(0)
    x = gaussian_step(rng.random((100_000, 1)), np.zeros((100_000, 1)), [1.0])
    assert abs(x.mean()) < 0.01
    assert abs(x.var() - 1) < 0.02


def test_gaussian_step_boundary_is_clamped():
    out = gaussian_step([[0.0, 1.0]], [[0.0, 0.0]], [1.0, 1.0])
    assert np.all(np.isfinite(out))
    assert out[0, 0] < -7 and out[0, 1] > 7


def test_gaussian_step_dimension_mismatch():
    with pytest.raises(ValueError):
        gaussian_step([0.5, 0.5], [0.0], [1.0])


def test_lattice_inputs_give_distinct_outputs():
    pts = korobov_points(LatticeRule(512, 55, 1))
    out = gaussian_step(pts, np.zeros_like(pts), [2.0])
    assert len(np.unique(out)) == 512
