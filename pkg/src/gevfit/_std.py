"""Vectorised helpers in standardized coordinates.

Everything here works on ``z = (x - mu) / sigma`` together with
``log_w = log(1 + gamma * z)``; callers that can compute ``log_w`` more
accurately than ``log1p(gamma * z)`` (for example close to a finite
endpoint) pass it in directly.
"""
from __future__ import annotations

import numpy as np

# |gamma * z| below these thresholds switches to the power series in gamma*z.
LOGU_SERIES_CUTOFF = 1e-5
DLOGU_SERIES_CUTOFF = 1e-4


def log_u(gamma: float, z, log_w):
    """``log u_gamma(z) = -log(1 + gamma z) / gamma`` with the gamma -> 0 series."""
    z = np.asarray(z, dtype=float)
    log_w = np.asarray(log_w, dtype=float)
    gz = gamma * z
    with np.errstate(over="ignore", invalid="ignore"):
        series = -z + gamma * z**2 / 2 - gamma**2 * z**3 / 3 + gamma**3 * z**4 / 4
    if gamma == 0.0:
        return series
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = -log_w / gamma
    return np.where(np.abs(gz) < LOGU_SERIES_CUTOFF, series, closed)


def dlogu(gamma: float, z, log_w, w):
    """``d/dgamma log u = int_0^z t / (1 + gamma t)^2 dt``."""
    z = np.asarray(z, dtype=float)
    gz = gamma * z
    with np.errstate(over="ignore", invalid="ignore"):
        series = z**2 * (0.5 - 2.0 / 3.0 * gz + 0.75 * gz**2 - 0.8 * gz**3)
    if gamma == 0.0:
        return series
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        closed = (log_w / gamma - z / w) / gamma
    out = np.where(np.abs(gz) < DLOGU_SERIES_CUTOFF, series, closed)
    # the integrand is nonnegative; clip rounding noise at z ~ 0
    return np.maximum(out, 0.0)


def score_parts(gamma: float, sigma: float, z, w, u, dl):
    """Return the three score components ``(d_gamma, d_mu, d_sigma)``."""
    d_gamma = (1.0 - u) * dl - z / w
    d_mu = (gamma + 1.0 - u) / (sigma * w)
    d_sigma = ((1.0 - u) * z - 1.0) / (sigma * w)
    return d_gamma, d_mu, d_sigma


def standardize(gamma: float, mu: float, sigma: float, x):
    """Return ``(z, w, log_w, inside)`` for observations ``x``."""
    x = np.asarray(x, dtype=float)
    z = (x - mu) / sigma
    gz = gamma * z
    w = 1.0 + gz
    inside = w > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_w = np.where(inside, np.log1p(np.where(inside, gz, 0.0)), np.nan)
    return z, w, log_w, inside
