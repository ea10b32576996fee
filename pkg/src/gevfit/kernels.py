"""Backend selection for the per-sample reductions.

The compiled extension is used when it was built; setting
``GEVFIT_PURE_PYTHON=1`` forces the numpy fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("GEVFIT_PURE_PYTHON") != "1":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py


def _arr(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=float)


def loglik_sum(gamma: float, mu: float, sigma: float, x) -> float:
    return float(_impl.loglik_sum(float(gamma), float(mu), float(sigma), _arr(x)))


def loglik_score_sum(gamma: float, mu: float, sigma: float, x):
    ll, s = _impl.loglik_score_sum(float(gamma), float(mu), float(sigma), _arr(x))
    return float(ll), np.asarray(s)


def score_moments(gamma: float, mu: float, sigma: float, x):
    return _impl.score_moments(float(gamma), float(mu), float(sigma), _arr(x))
