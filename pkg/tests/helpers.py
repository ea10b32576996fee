"""Shared generators and independent reference computations for the tests."""
from __future__ import annotations

import math

import numpy as np

from gevfit import log_density


def random_interior_points(n: int, seed: int, g_lo: float = -0.45, g_hi: float = 3.0,
                           min_w: float = 0.01):
    """Random ``(theta, x)`` pairs with ``1 + gamma z > min_w``."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        g = rng.uniform(g_lo, g_hi)
        m = rng.uniform(-2, 2)
        s = math.exp(rng.uniform(math.log(0.2), math.log(5)))
        # spread z over the bulk and both tails via log-uniform u
        u = math.exp(rng.uniform(math.log(1e-4), math.log(30)))
        z = -math.log(u) if g == 0 else (u ** -g - 1) / g
        if 1 + g * z <= min_w or not math.isfinite(z):
            continue
        out.append(((g, m, s), m + s * z))
    return out


def fd_score(theta, x: float, rel_step: float = 1e-6) -> np.ndarray:
    """Five-point central differences of ``log_density`` in each parameter."""
    t = np.asarray(theta, dtype=float)
    out = np.empty(3)
    for k in range(3):
        h = rel_step * (1 + abs(t[k]))
        f = []
        for c in (2, 1, -1, -2):
            tc = t.copy()
            tc[k] += c * h
            f.append(log_density(tc, x))
        out[k] = (-f[0] + 8 * f[1] - 8 * f[2] + f[3]) / (12 * h)
    return out


def plain_loglik(theta, x: np.ndarray) -> float:
    """Direct textbook GEV log-likelihood, sharing no code with the package."""
    g, m, s = theta
    z = (np.asarray(x) - m) / s
    if abs(g) < 1e-12:
        return float(np.sum(-math.log(s) - z - np.exp(-z)))
    w = 1 + g * z
    if np.any(w <= 0):
        return -math.inf
    return float(np.sum(-math.log(s) - (1 + 1 / g) * np.log(w) - w ** (-1 / g)))


def validate_schema(instance, name: str) -> None:
    """Validate ``instance`` against a bundled schema, resolving cross references."""
    import json
    from importlib import resources

    import jsonschema
    from referencing import Registry, Resource

    root = resources.files("gevfit") / "schemas"
    docs = {p.name: json.loads(p.read_text()) for p in root.iterdir() if p.name.endswith(".schema.json")}
    registry = Registry().with_resources((k, Resource.from_contents(v)) for k, v in docs.items())
    jsonschema.Draft202012Validator(docs[f"{name}.schema.json"], registry=registry).validate(instance)
