"""Parameter-dependent supports and their shrinkage over max-norm balls."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .gev_core import Theta, as_theta, cdf

__all__ = [
    "SupportInterval",
    "CommonSupport",
    "support_of",
    "endpoint",
    "common_support",
    "mass_outside",
    "endpoint_shift_mass",
    "envelope_constants",
    "relative_z_error",
]


@dataclass(frozen=True)
class SupportInterval:
    lower: float
    upper: float
    theta: Theta

    def contains(self, x) -> np.ndarray | bool:
        x = np.asarray(x, dtype=float)
        out = (x > self.lower) & (x < self.upper)
        return out.item() if out.ndim == 0 else out


@dataclass(frozen=True)
class CommonSupport:
    """Intersection of the supports over the open max-norm ball ``U_eps(theta0)``."""

    theta0: Theta
    epsilon: float
    lower: float
    upper: float

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        out = (x > self.lower) & (x < self.upper)
        return out.item() if out.ndim == 0 else out


def endpoint(theta) -> float:
    """The finite endpoint ``mu - sigma / gamma`` (undefined at gamma = 0)."""
    theta = as_theta(theta)
    if theta.gamma == 0:
        raise InvalidParameterError("gamma = 0 has no finite endpoint")
    return theta.mu - theta.sigma / theta.gamma


def support_of(theta) -> SupportInterval:
    theta = as_theta(theta)
    if theta.gamma == 0:
        return SupportInterval(-math.inf, math.inf, theta)
    w = endpoint(theta)
    if theta.gamma < 0:
        return SupportInterval(-math.inf, w, theta)
    return SupportInterval(w, math.inf, theta)


def _check_eps(theta0: Theta, eps: float) -> None:
    if not eps > 0:
        raise InvalidParameterError("epsilon must be > 0")
    if not theta0.sigma - eps > 0:
        raise InvalidParameterError(f"epsilon={eps} violates sigma0 - epsilon > 0")
    if theta0.gamma != 0 and not eps < abs(theta0.gamma):
        raise InvalidParameterError(f"epsilon={eps} violates epsilon < |gamma0|")
    if theta0.gamma == 0 and not eps * eps < theta0.sigma - eps:
        raise InvalidParameterError(
            f"epsilon={eps} violates epsilon^2 < sigma0 - epsilon (empty common support)"
        )


def common_support(theta0, epsilon: float) -> CommonSupport:
    """Closed-form envelopes of the common support for the three signs of gamma0."""
    theta0 = as_theta(theta0)
    eps = float(epsilon)
    _check_eps(theta0, eps)
    g, m, s = theta0.gamma, theta0.mu, theta0.sigma
    if g < 0:
        # omega is increasing in every coordinate; the infimum sits at the lower corner
        upper = (m - eps) + (s - eps) / abs(g - eps)
        return CommonSupport(theta0, eps, -math.inf, upper)
    if g > 0:
        lower = m + eps - (s - eps) / (g + eps)
        return CommonSupport(theta0, eps, lower, math.inf)
    lower = m + eps - (s - eps) / eps
    upper = m - eps + (s - eps) / eps
    return CommonSupport(theta0, eps, lower, upper)


def mass_outside(theta0, epsilon: float) -> float:
    """``P_theta0`` of the complement of the common support."""
    theta0 = as_theta(theta0)
    if epsilon == 0:
        return 0.0
    cs = common_support(theta0, epsilon)
    left = cdf(theta0, cs.lower) if math.isfinite(cs.lower) else 0.0
    right = _upper_tail(theta0, cs.upper) if math.isfinite(cs.upper) else 0.0
    return float(left + right)


def _upper_tail(theta: Theta, x: float) -> float:
    # 1 - exp(-u) without cancellation
    from .gev_core import u_gamma

    p = u_gamma(theta.gamma, (x - theta.mu) / theta.sigma)
    if not p.in_support:
        return 0.0 if theta.gamma < 0 else 1.0
    return float(-math.expm1(-p.u))


def endpoint_shift_mass(theta0, t: float) -> float:
    """Mass that ``theta0 + (0, t, 0)`` puts beyond the upper endpoint of theta0.

    Equals ``1 - exp(-(|gamma0| t / sigma0)^(1/|gamma0|))``.
    """
    theta0 = as_theta(theta0)
    if theta0.gamma >= 0:
        raise InvalidParameterError("endpoint_shift_mass needs gamma0 < 0 (finite upper endpoint)")
    t = float(t)
    if t < 0:
        raise InvalidParameterError("t must be >= 0")
    g = abs(theta0.gamma)
    return -math.expm1(-((g * t / theta0.sigma) ** (1.0 / g)))


def envelope_constants(theta0, t0: float, n_grid: int = 200) -> tuple[float, float]:
    """Fitted ``(b, c)`` with ``b <= |h(t) - omega0| / (t sigma0/|gamma0|) <= c`` on ``(0, t0]``."""
    theta0 = as_theta(theta0)
    if theta0.gamma == 0:
        raise InvalidParameterError("the endpoint envelope needs gamma0 != 0")
    w0 = endpoint(theta0)
    scale = theta0.sigma / abs(theta0.gamma)
    ts = np.linspace(t0 / n_grid, t0, n_grid)
    ratios = []
    for t in ts:
        cs = common_support(theta0, t)
        h = cs.upper if theta0.gamma < 0 else cs.lower
        ratios.append(abs(h - w0) / (t * scale))
    return float(min(ratios)), float(max(ratios))


def relative_z_error(theta, theta0, x: float) -> float:
    """``|z / z0 - 1|`` for standardized coordinates under theta and theta0."""
    theta, theta0 = as_theta(theta), as_theta(theta0)
    z0 = (x - theta0.mu) / theta0.sigma
    z = (x - theta.mu) / theta.sigma
    return abs(z / z0 - 1.0)
