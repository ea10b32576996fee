"""Brute-force reference fitter used to check the package optimizer."""
from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

GRID_POINTS = 51


def grid_loglik(g, m, s, x):
    """Vectorised textbook log-likelihood over broadcast parameter arrays."""
    z = (x[None, :] - m[:, None]) / s[:, None]
    gg = g[:, None]
    with np.errstate(all="ignore"):
        w = 1 + gg * z
        small = np.abs(gg) < 1e-12
        ll_gev = -np.log(s)[:, None] - (1 + 1 / gg) * np.log(w) - w ** (-1 / gg)
        ll_gum = -np.log(s)[:, None] - z - np.exp(-z)
        ll = np.where(small, ll_gum, np.where(w > 0, ll_gev, -np.inf))
    return ll.sum(axis=1)


def grid_oracle(x: np.ndarray, box) -> tuple[np.ndarray, np.ndarray]:
    """Best point of a 51^3 grid over ``box`` refined by bounded L-BFGS-B.

    Returns the refined estimate and the grid spacing per coordinate.
    """
    axes = [np.linspace(lo, hi, GRID_POINTS) for lo, hi in zip(box.lower, box.upper)]
    G, M = np.meshgrid(axes[0], axes[1], indexing="ij")
    G, M = G.ravel(), M.ravel()
    best, best_t = -np.inf, None
    for s in axes[2]:
        ll = grid_loglik(G, M, np.full(G.size, s), x)
        i = int(np.argmax(ll))
        if ll[i] > best:
            best, best_t = ll[i], np.array([G[i], M[i], s])
    step = np.array([a[1] - a[0] for a in axes])

    def nll(t):
        v = grid_loglik(np.array([t[0]]), np.array([t[1]]), np.array([t[2]]), x)[0]
        return -v if np.isfinite(v) else 1e300

    res = minimize(nll, best_t, method="L-BFGS-B",
                   bounds=list(zip(box.lower, box.upper)),
                   options={"ftol": 1e-15, "gtol": 1e-10, "maxiter": 2000})
    t = res.x if res.fun <= -best else best_t
    return t, step
