"""Pure numpy implementation of the per-sample reductions in ``_kernels``."""
from __future__ import annotations

import math

import numpy as np

from . import _std


def _pointwise(gamma, mu, sigma, x):
    z, w, log_w, inside = _std.standardize(gamma, mu, sigma, x)
    lu = _std.log_u(gamma, z, log_w)
    u = np.exp(lu)
    return z, w, log_w, inside, lu, u


def loglik_sum(gamma, mu, sigma, x):
    z, w, log_w, inside, lu, u = _pointwise(gamma, mu, sigma, x)
    if not inside.all():
        return -math.inf
    return float(np.sum(-math.log(sigma) - u + (gamma + 1.0) * lu))


def _scores(gamma, sigma, z, w, log_w, u):
    dl = _std.dlogu(gamma, z, log_w, w)
    return np.array(_std.score_parts(gamma, sigma, z, w, u, dl))


def loglik_score_sum(gamma, mu, sigma, x):
    z, w, log_w, inside, lu, u = _pointwise(gamma, mu, sigma, x)
    if not inside.all():
        return -math.inf, np.full(3, np.nan)
    ll = float(np.sum(-math.log(sigma) - u + (gamma + 1.0) * lu))
    return ll, _scores(gamma, sigma, z, w, log_w, u).sum(axis=1)


def score_moments(gamma, mu, sigma, x):
    z, w, log_w, inside, lu, u = _pointwise(gamma, mu, sigma, x)
    s = _scores(gamma, sigma, z[inside], w[inside], log_w[inside], u[inside])
    return s.sum(axis=1), s @ s.T, int((~inside).sum())
