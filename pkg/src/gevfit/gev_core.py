"""The three-parameter GEV family: density, CDF, quantile and sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import _std
from .errors import InvalidParameterError

__all__ = [
    "Theta",
    "StdPoint",
    "Sample",
    "as_theta",
    "u_gamma",
    "pdf",
    "log_density",
    "cdf",
    "quantile",
    "sample",
    "make_rng",
    "support",
]


@dataclass(frozen=True)
class Theta:
    """GEV parameter ``(gamma, mu, sigma)``: shape, location, scale."""

    gamma: float
    mu: float
    sigma: float

    def __post_init__(self):
        for name in ("gamma", "mu", "sigma"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidParameterError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.sigma <= 0:
            raise InvalidParameterError(f"sigma must be > 0, got {self.sigma!r}")

    @property
    def regular(self) -> bool:
        """True when gamma > -1/2, the region where the family is DQM."""
        return self.gamma > -0.5

    def as_array(self) -> np.ndarray:
        return np.array([self.gamma, self.mu, self.sigma])

    @classmethod
    def from_array(cls, a: Sequence[float]) -> "Theta":
        g, m, s = (float(v) for v in a)
        return cls(g, m, s)

    def shifted(self, h: Sequence[float]) -> "Theta":
        return Theta.from_array(self.as_array() + np.asarray(h, dtype=float))


def as_theta(theta: Any) -> Theta:
    if isinstance(theta, Theta):
        return theta
    return Theta.from_array(theta)


@dataclass(frozen=True)
class StdPoint:
    """Standardized coordinates of observation(s) under one parameter.

    ``u`` and ``log_u`` are NaN where ``in_support`` is False.
    """

    z: Any
    one_plus_gamma_z: Any
    u: Any
    log_u: Any
    in_support: Any


@dataclass
class Sample:
    values: np.ndarray
    origin: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.ascontiguousarray(np.asarray(self.values, dtype=float).ravel())

    def __len__(self) -> int:
        return self.values.size


def _scalarize(a):
    a = np.asarray(a)
    return a.item() if a.ndim == 0 else a


def u_gamma(gamma: float, z) -> StdPoint:
    """Evaluate ``u = (1 + gamma z)^(-1/gamma)`` (``exp(-z)`` at gamma = 0)."""
    gamma = float(gamma)
    z = np.asarray(z, dtype=float)
    w = 1.0 + gamma * z
    inside = w > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_w = np.log1p(np.where(inside, gamma * z, 0.0))
    lu = np.where(inside, _std.log_u(gamma, z, log_w), np.nan)
    u = np.exp(lu)
    return StdPoint(
        z=_scalarize(z),
        one_plus_gamma_z=_scalarize(w),
        u=_scalarize(u),
        log_u=_scalarize(lu),
        in_support=_scalarize(inside),
    )


def _log_density(theta: Theta, x):
    z, w, log_w, inside = _std.standardize(theta.gamma, theta.mu, theta.sigma, x)
    lu = _std.log_u(theta.gamma, z, log_w)
    with np.errstate(invalid="ignore", over="ignore"):
        ll = -math.log(theta.sigma) - np.exp(lu) + (theta.gamma + 1.0) * lu
    return np.where(inside, ll, -np.inf)


def log_density(theta, x):
    """Log-density; ``-inf`` off the (open) support."""
    return _scalarize(_log_density(as_theta(theta), x))


def pdf(theta, x):
    return _scalarize(np.exp(_log_density(as_theta(theta), x)))


def cdf(theta, x):
    theta = as_theta(theta)
    z, w, log_w, inside = _std.standardize(theta.gamma, theta.mu, theta.sigma, x)
    lu = _std.log_u(theta.gamma, z, log_w)
    with np.errstate(over="ignore", invalid="ignore"):
        inner = np.exp(-np.exp(lu))
    # below the lower endpoint (gamma > 0) the mass is 0, above the upper one it is 1
    outside_value = 0.0 if theta.gamma > 0 else 1.0
    return _scalarize(np.where(inside, inner, outside_value))


def quantile(theta, p):
    theta = as_theta(theta)
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise InvalidParameterError("quantile requires 0 < p < 1")
    return _scalarize(_from_exponential(theta, -np.log(p)))


def _from_exponential(theta: Theta, e):
    """Map unit-exponential variates ``e`` (the ``u`` values) to observations."""
    le = np.log(e)
    if theta.gamma == 0.0:
        z = -le
    else:
        z = np.expm1(-theta.gamma * le) / theta.gamma
    return theta.mu + theta.sigma * z


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator (Philox) keyed by an int or a sequence of ints."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def sample(theta, n: int, seed) -> Sample:
    """Draw ``n`` observations as ``mu + sigma (E^-gamma - 1)/gamma``, E ~ Exp(1)."""
    theta = as_theta(theta)
    n = int(n)
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    rng = make_rng(seed)
    e = rng.standard_exponential(n)
    # E = 0 or E = inf would map onto a support endpoint
    e = np.clip(e, np.finfo(float).tiny, np.finfo(float).max)
    x = _from_exponential(theta, e)
    origin = {"theta": [theta.gamma, theta.mu, theta.sigma], "n": n}
    if not isinstance(seed, np.random.Generator):
        origin["seed"] = seed if isinstance(seed, int) else list(seed)
    return Sample(x, origin)


def support(theta):
    from .support_geometry import support_of

    return support_of(theta)
