"""Score vector, the d/dgamma log u integral, the m-criterion and bound envelopes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _std
from .errors import InvalidParameterError, OutOfSupportError
from .gev_core import Theta, as_theta, _log_density, _scalarize

__all__ = [
    "ScoreVector",
    "BoundEnvelope",
    "LEMMA_TARGETS",
    "dlogu",
    "score",
    "score_array",
    "m_criterion",
    "bound_envelopes",
    "pdf_pow_gradient",
    "segment_lipschitz_bound",
]

LOG2 = math.log(2.0)


def _exp(v: float) -> float:
    return math.exp(v) if v < 709.0 else math.inf


@dataclass(frozen=True)
class ScoreVector:
    d_gamma: float
    d_mu: float
    d_sigma: float

    def as_array(self) -> np.ndarray:
        return np.array([self.d_gamma, self.d_mu, self.d_sigma])


# Which quantity each envelope bounds: "dlogu" is d/dgamma log u itself,
# "z_ratio" is |z| / (1 + gamma z); the rest bound |score component|.
LEMMA_TARGETS = {
    "dlogu_bound": "dlogu",
    "mu_bound": "d_mu",
    "sigma_bound": "d_sigma",
    "gamma_pp": "d_gamma",
    "gamma_mp": "d_gamma",
    "gamma_pm": "d_gamma",
    "gamma_mm": "d_gamma",
    "z1pgz": "z_ratio",
}


@dataclass(frozen=True)
class BoundEnvelope:
    lemma_id: str
    value: float

    @property
    def target(self) -> str:
        return LEMMA_TARGETS[self.lemma_id]


def dlogu(gamma: float, z):
    """``int_0^z t (1 + gamma t)^-2 dt``; raises if ``1 + gamma z <= 0``."""
    gamma = float(gamma)
    z = np.asarray(z, dtype=float)
    w = 1.0 + gamma * z
    if np.any(~(w > 0)):
        raise OutOfSupportError("dlogu requires 1 + gamma*z > 0")
    return _scalarize(_std.dlogu(gamma, z, np.log1p(gamma * z), w))


def _pointwise(theta: Theta, x):
    z, w, log_w, inside = _std.standardize(theta.gamma, theta.mu, theta.sigma, x)
    lu = _std.log_u(theta.gamma, z, log_w)
    u = np.exp(lu)
    dl = _std.dlogu(theta.gamma, z, log_w, w)
    return z, w, lu, u, dl, inside


def score_array(theta, x) -> np.ndarray:
    """Score components as a ``(3, n)`` array; NaN where ``x`` is outside the support."""
    theta = as_theta(theta)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z, w, lu, u, dl, inside = _pointwise(theta, x)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        s = np.array(_std.score_parts(theta.gamma, theta.sigma, z, w, u, dl))
    s[:, ~inside] = np.nan
    return s


def score(theta, x: float) -> ScoreVector:
    theta = as_theta(theta)
    s = score_array(theta, [x])[:, 0]
    if np.isnan(s).any():
        raise OutOfSupportError(f"x={x!r} is outside the support of {theta}")
    return ScoreVector(*(float(v) for v in s))


def m_criterion(theta, theta0, x):
    """``2 log((p_theta + p_theta0) / (2 p_theta0))`` on the support of theta0."""
    theta, theta0 = as_theta(theta), as_theta(theta0)
    l0 = _log_density(theta0, x)
    if np.any(np.isneginf(l0)):
        raise OutOfSupportError("m_criterion requires x in the support of theta0")
    l1 = _log_density(theta, x)
    with np.errstate(invalid="ignore"):
        out = 2.0 * (np.logaddexp(0.0, l1 - l0) - LOG2)
    return _scalarize(out)


def bound_envelopes(theta, x: float) -> list[BoundEnvelope]:
    """Right-hand sides of the score and d/dgamma log u bounds that apply at ``x``.

    Cases are selected by the signs of gamma and z; at gamma = 0 or z = 0 every
    closed case applies and all of them are returned.
    """
    theta = as_theta(theta)
    g, s = theta.gamma, theta.sigma
    z = (float(x) - theta.mu) / s
    w = 1.0 + g * z
    if not w > 0:
        raise OutOfSupportError(f"x={x!r} is outside the support of {theta}")
    lu = float(_std.log_u(g, z, math.log1p(g * z)))
    u = _exp(lu)
    out = [BoundEnvelope("dlogu_bound", z * z / w)]

    if z <= 0:
        out.append(BoundEnvelope("mu_bound", (1 + abs(g)) * _exp((1 + g) * lu) / s))
    if z >= 0:
        out.append(BoundEnvelope("mu_bound", (1 + abs(g)) * _exp(g * lu) / s))

    if z >= 0:
        out.append(BoundEnvelope("sigma_bound", (z + 1) / (s * w)))
    if z <= 0:
        out.append(BoundEnvelope("sigma_bound", (1 + u * lu) * _exp(max(g, 0.0) * lu) / s))

    if g >= 0 and z >= 0:
        if g == 0:
            val = max(z * z / 2, z)
        else:
            val = max(min(z * z / 2, math.log1p(g * z) / g**2), min(z, 1 / g))
        out.append(BoundEnvelope("gamma_pp", val))
    if g <= 0 and z >= 0:
        out.append(BoundEnvelope("gamma_mp", max(z * z, z) / w))
    if g >= 0 and z <= 0:
        out.append(BoundEnvelope("gamma_pm", _exp((1 + g) * lu) * max(lu * lu, lu)))
    if g <= 0 and z <= 0:
        out.append(BoundEnvelope("gamma_mm", u * max(lu * lu, lu)))

    if z <= 0:
        out.append(BoundEnvelope("z1pgz", _exp(max(g, 0.0) * lu) * lu))
    return out


def pdf_pow_gradient(theta, x: float, a: float) -> np.ndarray:
    """Gradient in theta of ``p_theta(x)**a``; zero off the support and at its edge."""
    theta = as_theta(theta)
    a = float(a)
    if not 0.5 <= a < 1.0:
        raise InvalidParameterError("a must lie in [1/2, 1)")
    if not theta.gamma > -a / (1 + a):
        raise InvalidParameterError(
            f"p^a is not continuously differentiable at gamma={theta.gamma} for a={a}"
        )
    ll = float(_log_density(theta, [x])[0])
    if ll == -math.inf:
        return np.zeros(3)
    s = score_array(theta, [x])[:, 0]
    return a * math.exp(a * ll) * s


def segment_lipschitz_bound(theta1, theta2, x: float, n_grid: int = 64) -> float:
    """``3 * max ||score||_inf`` along the segment theta1 -> theta2, times ``||theta1 - theta2||_inf``.

    Returns ``inf`` when ``x`` leaves the support somewhere on the grid.
    """
    t1, t2 = as_theta(theta1).as_array(), as_theta(theta2).as_array()
    lam = np.linspace(0.0, 1.0, n_grid)
    best = 0.0
    for th in t1[None, :] + lam[:, None] * (t2 - t1)[None, :]:
        s = score_array(Theta.from_array(th), [x])[:, 0]
        if np.isnan(s).any():
            return math.inf
        best = max(best, float(np.abs(s).max()))
    return 3.0 * best * float(np.abs(t1 - t2).max())
