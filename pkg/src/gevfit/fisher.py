"""Fisher information of the GEV family.

Under ``P_theta`` the variable ``u = u_gamma(z)`` is unit exponential, so every
entry of the information matrix is an integral of a product of two score
components against ``exp(-u) du`` on ``(0, inf)``.  The part ``u < 1`` is
integrated in ``y = log u``, which turns the ``u^(2 gamma)`` endpoint
singularity for negative gamma into exponential decay; the remaining piece
below ``u = exp(Y_MIN)`` is added analytically from the leading-order score.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _std, kernels
from .errors import InformationUndefinedError, InvalidParameterError
from .gev_core import Theta, as_theta, sample
from .quadrature import integrate

__all__ = [
    "FisherMatrix",
    "fisher_information",
    "fisher_information_mc",
    "scores_in_u",
    "NEAR_SINGULAR_WIDTH",
]

NEAR_SINGULAR_WIDTH = 1e-3
Y_MIN = -600.0
U_MAX = 100.0
_PAIRS = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]


@dataclass(frozen=True)
class FisherMatrix:
    entries: np.ndarray
    theta: Theta
    quadrature_error: float
    near_singular: bool = False
    method: str = "quadrature"
    n: int | None = None

    def inverse(self) -> np.ndarray:
        inv = np.linalg.inv(self.entries)
        return 0.5 * (inv + inv.T)

    def cholesky(self) -> np.ndarray:
        return np.linalg.cholesky(self.entries)

    def is_positive_definite(self) -> bool:
        try:
            self.cholesky()
        except np.linalg.LinAlgError:
            return False
        return True

    def sqrt(self) -> np.ndarray:
        """Symmetric square root via eigendecomposition."""
        vals, vecs = np.linalg.eigh(self.entries)
        return (vecs * np.sqrt(vals)) @ vecs.T


def scores_in_u(gamma: float, sigma: float, y: np.ndarray) -> np.ndarray:
    """Score components, shape ``(3, len(y))``, at the point where ``log u = y``."""
    y = np.asarray(y, dtype=float)
    u = np.exp(y)
    if gamma == 0.0:
        z = -y
        log_w = np.zeros_like(y)
        w = np.ones_like(y)
    else:
        log_w = -gamma * y
        w = np.exp(log_w)
        z = np.expm1(log_w) / gamma
    dl = _std.dlogu(gamma, z, log_w, w)
    return np.array(_std.score_parts(gamma, sigma, z, w, u, dl))


def _leading_coefficients(gamma: float, sigma: float) -> np.ndarray:
    # score ~ a * u^gamma as u -> 0 for gamma < 0
    c = 1.0 + gamma
    return np.array([c / gamma**2, c / sigma, -c / (gamma * sigma)])


def fisher_information(theta, epsabs: float = 1e-11, epsrel: float = 1e-13) -> FisherMatrix:
    theta = as_theta(theta)
    g, s = theta.gamma, theta.sigma
    if not g > -0.5:
        raise InformationUndefinedError(
            f"Fisher information is undefined for gamma={g} <= -1/2"
        )
    y_min = Y_MIN if g <= 1.0 else Y_MIN / g

    def inner(y):
        sc = scores_in_u(g, s, y)
        weight = np.exp(y - np.exp(y))
        return np.array([sc[j] * sc[k] * weight for j, k in _PAIRS])

    def outer(u):
        sc = scores_in_u(g, s, np.log(u))
        weight = np.exp(-u)
        return np.array([sc[j] * sc[k] * weight for j, k in _PAIRS])

    r1 = integrate(inner, y_min, 0.0, epsabs=epsabs, epsrel=epsrel)
    r2 = integrate(outer, 1.0, U_MAX, epsabs=epsabs, epsrel=epsrel)
    vals = np.asarray(r1.value) + np.asarray(r2.value)
    if g < 0:
        a = _leading_coefficients(g, s)
        tail = math.exp((1.0 + 2.0 * g) * y_min) / (1.0 + 2.0 * g)
        vals = vals + np.array([a[j] * a[k] * tail for j, k in _PAIRS])
    m = np.empty((3, 3))
    for v, (j, k) in zip(vals, _PAIRS):
        m[j, k] = m[k, j] = v
    return FisherMatrix(
        entries=m,
        theta=theta,
        quadrature_error=float(r1.error + r2.error),
        near_singular=g <= -0.5 + NEAR_SINGULAR_WIDTH,
    )


def fisher_information_mc(theta, n: int, seed) -> FisherMatrix:
    """Empirical second-moment matrix of the score over ``sample(theta, n, seed)``."""
    theta = as_theta(theta)
    if not theta.gamma > -0.5:
        raise InformationUndefinedError(
            f"Fisher information is undefined for gamma={theta.gamma} <= -1/2"
        )
    if n < 10_000:
        raise InvalidParameterError("fisher_information_mc needs n >= 10^4")
    x = sample(theta, n, seed).values
    first, second, n_out = kernels.score_moments(theta.gamma, theta.mu, theta.sigma, x)
    if n_out:
        raise InvalidParameterError(f"{n_out} sampled points fell outside the support")
    m = np.asarray(second) / n
    return FisherMatrix(
        entries=m,
        theta=theta,
        quadrature_error=float("nan"),
        near_singular=theta.gamma <= -0.5 + NEAR_SINGULAR_WIDTH,
        method="monte_carlo",
        n=int(n),
    )
