from __future__ import annotations

import math

import numpy as np
import pytest

from gevfit.quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, integrate


@pytest.mark.parametrize("degree", range(0, 23))
def test_kronrod_rule_exact_for_polynomials(degree):
    exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
    assert KRONROD_WEIGHTS @ NODES**degree == pytest.approx(exact, abs=1e-14)


@pytest.mark.parametrize("degree", range(0, 14))
def test_gauss_rule_exact_for_polynomials(degree):
    exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
    assert GAUSS_WEIGHTS @ NODES**degree == pytest.approx(exact, abs=1e-14)


@pytest.mark.parametrize(
    "f, a, b, exact",
    [
        (np.exp, 0.0, 1.0, math.e - 1),
        (lambda x: 1 / np.sqrt(x), 0.0, 1.0, 2.0),
        (lambda x: np.log(x), 0.0, 1.0, -1.0),
        (lambda x: np.exp(-x), 0.0, 60.0, -math.expm1(-60.0)),
        (lambda x: np.abs(x - 0.3), 0.0, 1.0, 0.29),
    ],
)
def test_known_integrals(f, a, b, exact):
    r = integrate(f, a, b, epsabs=1e-13, epsrel=1e-12)
    assert r.value == pytest.approx(exact, rel=1e-9, abs=1e-11)


def test_vector_valued():
    r = integrate(lambda x: np.array([x, x**2, np.sin(x)]), 0.0, 1.0)
    np.testing.assert_allclose(r.value, [0.5, 1 / 3, 1 - math.cos(1.0)], rtol=1e-13)
    assert r.converged


def test_breakpoint_helps_kink():
    f = lambda x: np.abs(x - 1 / 3)
    with_bp = integrate(f, 0.0, 1.0, breakpoints=[1 / 3])
    assert with_bp.panels <= 2
    assert with_bp.value == pytest.approx(5 / 18, rel=1e-14)


def test_deterministic():
    f = lambda x: np.exp(-x) * np.sin(10 * x) ** 2
    a = integrate(f, 0.0, 20.0)
    b = integrate(f, 0.0, 20.0)
    assert a.value == b.value and a.panels == b.panels


def test_reports_nonconvergence():
    r = integrate(lambda x: 1 / x, 1e-300, 1.0, max_panels=20)
    assert not r.converged
