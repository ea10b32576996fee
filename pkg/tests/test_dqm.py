from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate, stats

from gevfit import InvalidParameterError
from gevfit.dqm_verify import (
    dqm_certify,
    dqm_remainder,
    shrink_rate_check,
    shrink_rate_sequence,
    support_witness,
)
from gevfit.support_geometry import endpoint_shift_mass


def _mp_logpdf(theta, x):
    g, m, s = theta
    z = (x - m) / s
    if g == 0:
        return -mp.log(s) - z - mp.exp(-z)
    w = 1 + g * z
    if w <= 0:
        return -mp.inf
    return -mp.log(s) - (1 + 1 / g) * mp.log(w) - w ** (-1 / g)


def _mp_score(theta, x):
    out = []
    for k in range(3):
        def f(v, k=k):
            t = list(theta)
            t[k] = v
            return _mp_logpdf(t, x)
        out.append(mp.diff(f, theta[k]))
    return out


def reference_remainder(theta0, h):
    """x-space remainder from a 30-digit textbook density and its derivative."""
    mp.mp.dps = 30
    t0 = [mp.mpf(v) for v in theta0]
    t1 = [a + mp.mpf(b) for a, b in zip(t0, h)]
    hh = [mp.mpf(v) for v in h]

    def f(x):
        x = mp.mpf(x)
        l0 = _mp_logpdf(t0, x)
        if l0 == -mp.inf:
            return 0.0
        l1 = _mp_logpdf(t1, x)
        lin = sum(a * b for a, b in zip(hh, _mp_score(t0, x))) / 2
        r = (0 if l1 == -mp.inf else mp.exp(l1 / 2)) - mp.exp(l0 / 2) * (1 + lin)
        return float(r * r)

    g0, m0, s0 = theta0
    g1, m1, s1 = (a + b for a, b in zip(theta0, h))
    d0 = stats.genextreme(c=-g0, loc=m0, scale=s0)
    d1 = stats.genextreme(c=-g1, loc=m1, scale=s1)
    lo, hi, outside = d0.ppf(1e-300), math.inf, 0.0
    if g0 > 0:
        lo = m0 - s0 / g0
        outside = d1.cdf(lo)
    elif g0 < 0:
        hi = m0 - s0 / g0
        outside = d1.sf(hi)
    edges = [lo, hi] + [d0.ppf(q) for q in (1e-6, 0.01, 0.5, 0.99)]
    if g1 != 0:
        edges.append(m1 - s1 / g1)
    if math.isinf(hi):
        # geometric panels so the heavy right tail is not skipped
        top = max(d0.ppf(0.99), 1.0)
        edges += [top * 4.0**k for k in range(1, 30)]
    edges = sorted(e for e in set(edges) if lo <= e <= hi)
    val = sum(integrate.quad(f, a, b, epsabs=1e-16, epsrel=1e-10, limit=200)[0]
              for a, b in zip(edges, edges[1:]))
    return val + outside


class TestRemainder:
    def test_zero_direction(self):
        assert dqm_remainder((0.3, 0, 1), (0, 0, 0)) == 0.0

    @pytest.mark.parametrize("theta0", [(0.5, 0, 1), (0.0, 0, 1), (-0.3, 0.5, 2.0)])
    @pytest.mark.parametrize("h", [(0.1, 0, 0), (0, 0.1, 0), (0, 0, 0.1), (0.05, -0.05, 0.05)])
    def test_against_x_space_reference(self, theta0, h):
        assert dqm_remainder(theta0, h) == pytest.approx(reference_remainder(theta0, h), rel=1e-4, abs=1e-12)

    @pytest.mark.parametrize("g0", [-0.45, -0.3, -0.1])
    def test_bounded_below_by_endpoint_shift(self, g0):
        for t in (0.1, 0.01, 0.001):
            r = dqm_remainder((g0, 0, 1), (0, t, 0))
            assert r >= endpoint_shift_mass((g0, 0, 1), t) - 1e-12

    def test_scaled_remainder_decreasing_regular(self):
        vals = [dqm_remainder((0.5, 0, 1), (2.0**-k, 0, 0)) * 4.0**k for k in range(4, 12)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("g0", [-0.6, -0.8])
    def test_infinite_below_half(self, g0):
        assert dqm_remainder((g0, 0, 1), (0, 0.01, 0)) == math.inf

    def test_witness_is_lower_bound(self):
        for t in (0.1, 0.02):
            assert dqm_remainder((-0.4, 0, 1), (0, t, 0)) >= support_witness((-0.4, 0, 1), (0, t, 0))

    def test_rejects_bad_shape(self):
        with pytest.raises(InvalidParameterError):
            dqm_remainder((0, 0, 1), (1, 0))


class TestCertify:
    @pytest.mark.parametrize("g0, verdict", [(0.5, "dqm_holds"), (0.0, "dqm_holds"), (-0.4, "dqm_holds"),
                                             (-0.6, "dqm_fails")])
    def test_verdicts(self, g0, verdict):
        assert dqm_certify((g0, 0, 1)).verdict == verdict

    def test_slopes_regular(self):
        rep = dqm_certify((0.5, 0, 1))
        assert all(s == pytest.approx(4.0, abs=0.1) for s in rep.slopes)
        assert all(r.slope_source == "remainder" for r in rep.results)

    def test_witness_slope_below_half(self):
        rep = dqm_certify((-0.8, 0, 1))
        assert rep.verdict == "dqm_fails"
        assert any(r.slope_source == "support_witness" for r in rep.results)
        assert rep.slope == pytest.approx(1 / 0.8, abs=0.05)
        assert rep.notes

    def test_negative_slope_tracks_gamma(self):
        # the support term dominates with rate t^(1/|gamma0|)
        assert dqm_certify((-0.4, 0, 1)).slope == pytest.approx(2.5, abs=0.1)

    def test_deterministic(self):
        a = dqm_certify((-0.3, 0, 1), k_range=(6, 11)).to_dict()
        b = dqm_certify((-0.3, 0, 1), k_range=(6, 11)).to_dict()
        assert a == b

    def test_rejects_fine_steps(self):
        with pytest.raises(InvalidParameterError):
            dqm_certify((0, 0, 1), k_range=(4, 15))

    def test_rejects_short_range(self):
        with pytest.raises(InvalidParameterError):
            dqm_certify((0, 0, 1), k_range=(4, 6))

    def test_rejects_unnormalised_direction(self):
        with pytest.raises(InvalidParameterError):
            dqm_certify((0, 0, 1), directions=[(2.0, 0, 0)])


class TestShrinkRate:
    def test_decays_at_minus_04(self):
        seq = shrink_rate_sequence((-0.4, 0, 1))
        assert seq[-1] < seq[0] / 4
        assert shrink_rate_check((-0.4, 0, 1)) == seq[-1]

    def test_decreasing_near_boundary(self):
        seq = shrink_rate_sequence((-0.49, 0, 1))
        assert np.all(np.diff(seq) < 0)

    def test_tail_sup(self):
        seq = shrink_rate_sequence((-0.3, 0, 1))
        assert shrink_rate_check((-0.3, 0, 1), tail=3) == seq[-3:].max()

    @pytest.mark.parametrize("g0", [-0.5, 0.0, 0.3])
    def test_rejects_gamma_outside_range(self, g0):
        with pytest.raises(InvalidParameterError):
            shrink_rate_check((g0, 0, 1))
