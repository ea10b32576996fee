from __future__ import annotations

import math

import numpy as np
import pytest

from gevfit import InvalidParameterError, pdf
from gevfit.support_geometry import (
    common_support,
    endpoint,
    endpoint_shift_mass,
    envelope_constants,
    mass_outside,
    relative_z_error,
    support_of,
)


@pytest.mark.parametrize(
    "theta, lo, hi",
    [((0.5, 0, 1), -2.0, math.inf), ((0, 0, 1), -math.inf, math.inf), ((-0.5, 0, 1), -math.inf, 2.0)],
)
def test_support_of(theta, lo, hi):
    s = support_of(theta)
    assert (s.lower, s.upper) == (lo, hi)


def test_endpoint_requires_nonzero_gamma():
    with pytest.raises(InvalidParameterError):
        endpoint((0, 0, 1))


@pytest.mark.parametrize(
    "theta0, lo, hi",
    [((0.5, 0, 1), -1.4, math.inf), ((-0.4, 0, 1), -math.inf, 1.7), ((0, 0, 1), -8.9, 8.9)],
)
def test_common_support_examples(theta0, lo, hi):
    cs = common_support(theta0, 0.1)
    assert cs.lower == pytest.approx(lo, rel=1e-14)
    assert cs.upper == pytest.approx(hi, rel=1e-14)


@pytest.mark.parametrize(
    "theta0, eps, word",
    [((0.5, 0, 1), 1.0, "sigma0"), ((0.2, 0, 1), 0.3, "gamma0"), ((0, 0, 1), 0.7, "empty")],
)
def test_eps_too_large_names_constraint(theta0, eps, word):
    with pytest.raises(InvalidParameterError, match=word):
        common_support(theta0, eps)


@pytest.mark.parametrize("theta0", [(-0.3, 0.5, 1.2), (0.0, 0, 1), (0.6, -1, 2)])
def test_membership(theta0):
    eps = 0.08
    cs = common_support(theta0, eps)
    rng = np.random.default_rng(11)
    thetas = np.asarray(theta0) + rng.uniform(-eps, eps, (1000, 3))
    # finite stand-ins for infinite ends, staying well inside the interval
    lo = cs.lower if math.isfinite(cs.lower) else -30.0
    hi = cs.upper if math.isfinite(cs.upper) else 60.0
    xs = rng.uniform(lo, hi, 1000)
    xs = xs[(xs > cs.lower) & (xs < cs.upper)]
    for t, x in zip(thetas, xs):
        assert pdf(t, x) > 0 or pdf(t, x) == 0 and _underflows(t, x)


def _underflows(t, x):
    # the density can round to zero far in a tail while x is still inside the support
    g, m, s = t
    return 1 + g * (x - m) / s > 0


def test_membership_brute_force_corners():
    theta0 = np.array([-0.3, 0.0, 1.0])
    eps = 0.05
    cs = common_support(theta0, eps)
    corners = np.array(np.meshgrid(*[[-1, 1]] * 3)).T.reshape(-1, 3) * (eps * (1 - 1e-9))
    ends = [t[1] - t[2] / t[0] for t in theta0 + corners]
    assert min(ends) >= cs.upper - 1e-9


def test_mass_outside_limits():
    assert mass_outside((0.5, 0, 1), 0) == 0.0
    assert mass_outside((0.5, 0, 1), 0.1) > 0


@pytest.mark.parametrize("g", [-0.45, -0.25, 0.0, 0.5, 2.0])
def test_o_eps_squared(g):
    ratio = np.array([mass_outside((g, 0, 1), 2.0**-k) * 4.0**k for k in range(3, 13)])
    # non-increasing once past its peak (the peak can sit after k = 3), and below the start
    peak = int(np.argmax(ratio))
    assert np.all(np.diff(ratio[peak:]) <= 0)
    assert ratio[-1] < ratio[0]


def test_mass_rate_negative_gamma():
    # mass is of order eps^(1/|g|)
    k = np.arange(6, 13)
    m = [mass_outside((-0.4, 0, 1), 2.0**-kk) for kk in k]
    slope = np.polyfit(np.log(2.0**-k), np.log(m), 1)[0]
    assert slope == pytest.approx(2.5, abs=0.05)


class TestEndpointShift:
    def test_example(self):
        assert endpoint_shift_mass((-0.5, 0, 1), 0.1) == pytest.approx(-math.expm1(-0.05**2), rel=1e-14)
        assert endpoint_shift_mass((-0.5, 0, 1), 0.1) == pytest.approx(0.0024969, abs=1e-7)

    def test_zero_limit(self):
        assert endpoint_shift_mass((-0.3, 0, 1), 1e-12) < 1e-30

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_boundary_limit(self, sigma):
        t = 1e-5
        assert endpoint_shift_mass((-0.5, 0, sigma), t) / t**2 == pytest.approx(1 / (4 * sigma**2), rel=1e-6)

    def test_divergence_below_half(self):
        r = [endpoint_shift_mass((-0.6, 0, 1), 2.0**-k) * 4.0**k for k in range(4, 15)]
        assert all(b > a for a, b in zip(r, r[1:]))

    def test_matches_shifted_distribution(self):
        from gevfit import cdf

        theta0 = (-0.35, 0.2, 1.3)
        t = 0.07
        w0 = endpoint(theta0)
        shifted = (theta0[0], theta0[1] + t, theta0[2])
        assert endpoint_shift_mass(theta0, t) == pytest.approx(1 - cdf(shifted, w0), rel=1e-9)

    def test_rejects_nonnegative_gamma(self):
        with pytest.raises(InvalidParameterError):
            endpoint_shift_mass((0.0, 0, 1), 0.1)


@pytest.mark.parametrize("theta0", [(-0.4, 0, 1), (0.5, 0, 1), (1.5, 2, 0.7)])
def test_envelope_sandwich(theta0):
    b, c = envelope_constants(theta0, 0.05)
    assert 0 < b <= c < math.inf
    w0 = endpoint(theta0)
    scale = theta0[2] / abs(theta0[0])
    for t in (0.05, 0.01, 0.001):
        cs = common_support(theta0, t)
        h = cs.upper if theta0[0] < 0 else cs.lower
        assert b * t * scale - 1e-12 <= abs(h - w0) <= c * t * scale + 1e-12


def test_relative_z_error():
    assert relative_z_error((0, 0, 1), (0, 0, 1), 2.0) == 0.0
    assert relative_z_error((0, 0, 2), (0, 0, 1), 2.0) == pytest.approx(0.5)
