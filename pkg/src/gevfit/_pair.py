"""Log-likelihood ratios between two parameters, indexed by ``y = log u`` under the first.

Working in ``u0`` rather than ``x`` keeps full relative accuracy near a finite
endpoint of ``theta0``: there ``w0 = 1 + gamma0 z0 = exp(-gamma0 y)`` is exact,
and ``1 + gamma1 z1`` is formed as ``C + k w0`` with ``C`` proportional to the
gap between the two endpoints.
"""
from __future__ import annotations

import math

import numpy as np

from . import _std
from .gev_core import Theta

# below this |gamma| the endpoint form loses accuracy and the direct form is used
_ENDPOINT_FORM_MIN_GAMMA = 1e-3


def _z0(gamma0: float, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if gamma0 == 0.0:
        return -y, np.ones_like(y)
    w0 = np.exp(-gamma0 * y)
    return np.expm1(-gamma0 * y) / gamma0, w0


def log_ratio(theta0: Theta, theta1: Theta, y) -> np.ndarray:
    """``log p_theta1(x) - log p_theta0(x)`` at the ``x`` with ``log u_theta0(x) = y``.

    ``-inf`` where ``x`` lies outside the support of theta1.
    """
    y = np.asarray(y, dtype=float)
    g0, m0, s0 = theta0.gamma, theta0.mu, theta0.sigma
    g1, m1, s1 = theta1.gamma, theta1.mu, theta1.sigma
    z0, w0 = _z0(g0, y)
    z1 = (m0 - m1 + s0 * z0) / s1
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        gz1 = g1 * z1
        w1 = 1.0 + gz1
        if abs(g0) > _ENDPOINT_FORM_MIN_GAMMA and abs(g1) > _ENDPOINT_FORM_MIN_GAMMA:
            # 1 + g1 z1 = (C + (g1 s0 / g0) w0) / s1 with C = g1 (omega0 - omega1)
            c = g1 * ((m0 - s0 / g0) - (m1 - s1 / g1))
            w1_end = (c + (g1 * s0 / g0) * w0) / s1
            near = w0 < 0.5
            w1 = np.where(near, w1_end, w1)
            z1 = np.where(near, (w1_end - 1.0) / g1, z1)
            gz1 = g1 * z1
        inside = w1 > 0
        log_w1 = np.where(inside, np.log1p(np.where(inside, gz1, 0.0)), np.nan)
        if abs(g0) > _ENDPOINT_FORM_MIN_GAMMA and abs(g1) > _ENDPOINT_FORM_MIN_GAMMA:
            log_w1 = np.where(near & inside, np.log(np.where(inside, w1, 1.0)), log_w1)
        lu1 = _std.log_u(g1, z1, log_w1)
        # u1 - u0 = u0 * expm1(lu1 - y)
        du = np.exp(y) * np.expm1(lu1 - y)
        out = math.log(s0 / s1) - du + (g1 + 1.0) * (lu1 - y) + (g1 - g0) * y
    return np.where(inside, out, -np.inf)


def log_u_at(theta: Theta, x: float) -> float | None:
    """``log u_theta(x)``; None when ``x`` is outside the open support."""
    z = (x - theta.mu) / theta.sigma
    gz = theta.gamma * z
    if not 1.0 + gz > 0:
        return None
    return float(_std.log_u(theta.gamma, z, math.log1p(gz)))


def endpoint_in_log_u(theta0: Theta, theta1: Theta) -> float | None:
    """Finite endpoint of theta1's support mapped to ``log u`` under theta0, if inside."""
    if theta1.gamma == 0.0:
        return None
    omega1 = theta1.mu - theta1.sigma / theta1.gamma
    if theta0.gamma != 0.0:
        # 1 + g0 z0 at omega1 equals g0 (omega1 - omega0) / s0
        omega0 = theta0.mu - theta0.sigma / theta0.gamma
        w = theta0.gamma * (omega1 - omega0) / theta0.sigma
        if not w > 0:
            return None
        return -math.log(w) / theta0.gamma
    return log_u_at(theta0, omega1)


def mass_outside_support(theta0: Theta, theta1: Theta) -> float:
    """``P_theta1`` of the complement of theta0's support."""
    if theta0.gamma == 0.0:
        return 0.0
    omega0 = theta0.mu - theta0.sigma / theta0.gamma
    g1 = theta1.gamma
    if g1 == 0.0:
        lu = -(omega0 - theta1.mu) / theta1.sigma
    else:
        omega1 = theta1.mu - theta1.sigma / g1
        w = g1 * (omega0 - omega1) / theta1.sigma
        if not w > 0:
            # omega0 lies outside theta1's support
            if theta0.gamma < 0:
                return 0.0 if g1 < 0 else 1.0
            return 0.0 if g1 > 0 else 1.0
        lu = -math.log(w) / g1
    u = math.exp(lu) if lu < 709 else math.inf
    if theta0.gamma < 0:
        # complement is [omega0, inf)
        return float(-math.expm1(-u))
    return float(math.exp(-u))
