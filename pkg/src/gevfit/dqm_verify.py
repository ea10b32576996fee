"""Differentiability in quadratic mean: remainder rates and the failure witness.

For ``theta1 = theta0 + h`` the squared remainder splits as

    R(h) = int_{S0} (expm1(dl / 2) - h.score0 / 2)^2 dP0 + P1(S0^c),

with ``dl = log p1 - log p0``.  The first integral is taken in ``y = log u0``
so the weight is ``exp(y - e^y)``; the second has a closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._pair import endpoint_in_log_u, log_ratio, mass_outside_support
from .errors import InvalidParameterError
from .fisher import _leading_coefficients, scores_in_u
from .gev_core import Theta, as_theta
from .quadrature import integrate
from .support_geometry import endpoint_shift_mass

__all__ = [
    "DqmReport",
    "dqm_remainder",
    "dqm_certify",
    "support_witness",
    "shrink_rate_sequence",
    "shrink_rate_check",
    "SLOPE_MARGIN",
    "COORDINATE_DIRECTIONS",
]

SLOPE_MARGIN = 0.1
N_FIT_POINTS = 6
Y_MIN = -600.0
U_MAX = 100.0
COORDINATE_DIRECTIONS = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


@dataclass
class DirectionResult:
    direction: tuple[float, float, float]
    steps: list[float]
    remainders: list[float]
    witness: list[float]
    slope: float
    slope_source: str  # "remainder" or "support_witness"
    remainder_infinite: bool


@dataclass
class DqmReport:
    theta0: Theta
    results: list[DirectionResult]
    verdict: str
    margin: float = SLOPE_MARGIN
    notes: list[str] = field(default_factory=list)

    @property
    def direction(self):
        return self.results[0].direction

    @property
    def steps(self) -> list[float]:
        return self.results[0].steps

    @property
    def remainders(self) -> list[float]:
        return self.results[0].remainders

    @property
    def slope(self) -> float:
        return min(r.slope for r in self.results)

    @property
    def slopes(self) -> list[float]:
        return [r.slope for r in self.results]

    def to_dict(self) -> dict:
        return {
            "theta0": [self.theta0.gamma, self.theta0.mu, self.theta0.sigma],
            "verdict": self.verdict,
            "margin": self.margin,
            "directions": [
                {
                    "direction": list(r.direction),
                    "steps": r.steps,
                    "remainders": r.remainders,
                    "witness": r.witness,
                    "slope": r.slope,
                    "slope_source": r.slope_source,
                    "remainder_infinite": r.remainder_infinite,
                }
                for r in self.results
            ],
            "notes": list(self.notes),
        }


def _remainder_infinite(theta0: Theta, h: np.ndarray) -> bool:
    # for gamma0 <= -1/2 the score behaves like a * u^gamma0 near the endpoint,
    # which is not square integrable against exp(-u) du unless h.a = 0
    g = theta0.gamma
    if g > -0.5 or g <= -1.0:
        return False
    a = _leading_coefficients(g, theta0.sigma)
    return abs(float(h @ a)) > 1e-14 * float(np.abs(a).max() * np.abs(h).max())


def dqm_remainder(theta0, h, epsabs: float = 1e-30, epsrel: float = 1e-9) -> float:
    """``int (sqrt p_{theta0+h} - sqrt p_theta0 - h.score sqrt p_theta0 / 2)^2``.

    Returns ``inf`` when the score of theta0 is not square integrable along ``h``.
    """
    theta0 = as_theta(theta0)
    h = np.asarray(h, dtype=float)
    if h.shape != (3,):
        raise InvalidParameterError("h must be a 3-vector")
    if not np.any(h):
        return 0.0
    if not theta0.sigma + h[2] > 0:
        raise InvalidParameterError("theta0 + h has sigma <= 0")
    theta1 = theta0.shifted(h)
    if _remainder_infinite(theta0, h):
        return math.inf
    g0, s0 = theta0.gamma, theta0.sigma

    def integrand(y):
        dl = log_ratio(theta0, theta1, y)
        lin = 0.5 * (h @ scores_in_u(g0, s0, y))
        with np.errstate(over="ignore", invalid="ignore"):
            r = np.expm1(0.5 * dl) - lin
            out = r * r * np.exp(y - np.exp(y))
        return np.where(np.isfinite(out), out, 0.0)

    y_min = Y_MIN if g0 <= 1.0 else Y_MIN / g0
    brk = endpoint_in_log_u(theta0, theta1)
    brks = [] if brk is None else [brk]
    inner = integrate(integrand, y_min, 0.0, breakpoints=brks, epsabs=epsabs, epsrel=epsrel)
    outer = integrate(
        lambda u: integrand(np.log(u)) / u,
        1.0,
        U_MAX,
        breakpoints=[math.exp(b) for b in brks if 0.0 < b < math.log(U_MAX)],
        epsabs=epsabs,
        epsrel=epsrel,
    )
    return float(inner.value + outer.value + mass_outside_support(theta0, theta1))


def support_witness(theta0, h) -> float:
    """``P_{theta0+h}{p_theta0 = 0}``, a lower bound for the remainder."""
    theta0 = as_theta(theta0)
    return mass_outside_support(theta0, theta0.shifted(np.asarray(h, dtype=float)))


def _fit_slope(steps, values) -> float:
    t = np.log(np.asarray(steps[-N_FIT_POINTS:]))
    v = np.asarray(values[-N_FIT_POINTS:], dtype=float)
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        return math.nan
    return float(np.polyfit(t, np.log(v), 1)[0])


def _verdict(slopes: list[float], margin: float) -> str:
    if any(s <= 2.0 - margin for s in slopes if math.isfinite(s)):
        return "dqm_fails"
    if slopes and all(math.isfinite(s) and s > 2.0 + margin for s in slopes):
        return "dqm_holds"
    return "inconclusive"


def dqm_certify(theta0, directions=COORDINATE_DIRECTIONS, k_range=(4, 14),
                margin: float = SLOPE_MARGIN) -> DqmReport:
    """Fit ``log R`` against ``log t`` over ``t = 2^-k`` for each direction."""
    theta0 = as_theta(theta0)
    k_min, k_max = (int(k) for k in k_range)
    if k_max > 14:
        raise InvalidParameterError("k_max must be <= 14")
    if k_max - k_min + 1 < N_FIT_POINTS:
        raise InvalidParameterError(f"k_range must hold at least {N_FIT_POINTS} steps")
    steps = [2.0 ** -k for k in range(k_min, k_max + 1)]
    results = []
    notes = []
    for d in directions:
        d = np.asarray(d, dtype=float)
        if not math.isclose(float(np.abs(d).max()), 1.0, rel_tol=1e-12):
            raise InvalidParameterError("directions must have unit max-norm")
        rem = [dqm_remainder(theta0, t * d) for t in steps]
        wit = [support_witness(theta0, t * d) for t in steps]
        infinite = any(math.isinf(r) for r in rem)
        if infinite:
            slope = _fit_slope(steps, wit)
            source = "support_witness"
        else:
            slope = _fit_slope(steps, rem)
            source = "remainder"
        results.append(DirectionResult(tuple(float(v) for v in d), steps, rem, wit,
                                       slope, source, infinite))
    if any(r.remainder_infinite for r in results):
        notes.append("remainder infinite: score not square integrable; slope from support witness")
    verdict = _verdict([r.slope for r in results], margin)
    return DqmReport(theta0, results, verdict, margin, notes)


def shrink_rate_sequence(theta0, k_range=(4, 14)) -> np.ndarray:
    """``u_k^-2 P_theta0[omega0 - u_k, omega0)`` for ``u_k = 2^-k``."""
    theta0 = as_theta(theta0)
    if not -0.5 < theta0.gamma < 0.0:
        raise InvalidParameterError("shrink_rate_check needs gamma0 in (-1/2, 0)")
    ks = range(int(k_range[0]), int(k_range[1]) + 1)
    return np.array([endpoint_shift_mass(theta0, 2.0 ** -k) * 4.0 ** k for k in ks])


def shrink_rate_check(theta0, k_range=(4, 14), tail: int = 1) -> float:
    """Supremum of the scaled endpoint mass over the last ``tail`` steps of ``k_range``."""
    seq = shrink_rate_sequence(theta0, k_range)
    return float(seq[-max(int(tail), 1):].max())
