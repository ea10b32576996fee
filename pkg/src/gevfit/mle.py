"""Maximum likelihood over a compact parameter box.

A Nelder-Mead search in ``(gamma, mu, log sigma)`` treats any parameter
that puts an observation outside its support as infinitely bad. A Newton
polish on the analytic score then drives the gradient below tolerance.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .errors import (
    DegenerateSampleError,
    FitError,
    InfeasibleBoxError,
    InvalidParameterError,
    OutOfSupportError,
)
from .fisher import NEAR_SINGULAR_WIDTH, fisher_information
from .gev_core import Sample, Theta, as_theta
from .quadrature import integrate

__all__ = [
    "ParamBox",
    "FitOptions",
    "FitResult",
    "SmallSampleWarning",
    "default_box",
    "neg_loglik",
    "fit",
    "standard_errors",
    "linearization_residual",
    "expected_m_criterion",
]

EULER_GAMMA = 0.5772156649015329
# start offsets in (gamma, mu / sigma_init, log sigma)
_PERTURBATIONS = np.array([
    [0.2, 0.0, 0.0],
    [-0.2, 0.0, 0.0],
    [0.0, 0.3, 0.2],
    [0.0, -0.3, -0.2],
])


class SmallSampleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ParamBox:
    """Compact box ``[lo, hi]`` per coordinate; gamma must stay above -1/2."""

    gamma_range: tuple[float, float]
    mu_range: tuple[float, float]
    sigma_range: tuple[float, float]

    def __post_init__(self):
        for name in ("gamma_range", "mu_range", "sigma_range"):
            lo, hi = (float(v) for v in getattr(self, name))
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise InvalidParameterError(f"{name} must be a finite [lo, hi], got {(lo, hi)}")
            object.__setattr__(self, name, (lo, hi))
        if not self.gamma_range[0] > -0.5:
            raise InvalidParameterError("the gamma range must lie above -1/2")
        if not self.sigma_range[0] > 0:
            raise InvalidParameterError("the sigma range must lie in (0, inf)")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.gamma_range[0], self.mu_range[0], self.sigma_range[0]])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.gamma_range[1], self.mu_range[1], self.sigma_range[1]])

    def contains(self, theta) -> bool:
        t = as_theta(theta).as_array()
        return bool(np.all(t >= self.lower) and np.all(t <= self.upper))

    def clip(self, t) -> np.ndarray:
        return np.clip(np.asarray(t, dtype=float), self.lower, self.upper)

    def affine(self, a: float, b: float) -> "ParamBox":
        """Box for the data ``a * x + b`` (``a > 0``)."""
        if not a > 0:
            raise InvalidParameterError("scale factor must be positive")
        return ParamBox(
            self.gamma_range,
            (a * self.mu_range[0] + b, a * self.mu_range[1] + b),
            (a * self.sigma_range[0], a * self.sigma_range[1]),
        )

    def to_dict(self) -> dict:
        return {
            "gamma": list(self.gamma_range),
            "mu": list(self.mu_range),
            "sigma": list(self.sigma_range),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ParamBox":
        return cls(tuple(d["gamma"]), tuple(d["mu"]), tuple(d["sigma"]))


@dataclass(frozen=True)
class FitOptions:
    n_starts: int = 5
    grad_tol: float = 1e-6
    nm_xatol: float = 1e-4
    nm_fatol: float = 1e-9
    nm_maxiter: int = 2000
    newton_maxiter: int = 50
    fd_step: float = 1e-5
    multimodal_param_tol: float = 1e-4
    multimodal_loglik_tol: float = 1e-8


@dataclass
class FitResult:
    theta_hat: Theta
    loglik: float
    grad_norm: float
    iterations: int
    converged: bool
    stderr: np.ndarray
    boundary_hit: tuple[bool, bool, bool]
    n: int
    multimodal: bool = False
    warnings: list[str] = field(default_factory=list)
    history: list[float] = field(default_factory=list)
    loglik_init: float = -math.inf
    box: ParamBox | None = None

    @property
    def interior(self) -> bool:
        return not any(self.boundary_hit)


def _values(sample) -> np.ndarray:
    if isinstance(sample, Sample):
        return sample.values
    return np.ascontiguousarray(np.asarray(sample, dtype=float).ravel())


def neg_loglik(theta, sample) -> float:
    """``-(1/n) sum log p_theta(x_i)``; ``+inf`` when any point is off the support."""
    theta = as_theta(theta)
    x = _values(sample)
    if x.size == 0:
        raise InvalidParameterError("sample must be nonempty")
    return -kernels.loglik_sum(theta.gamma, theta.mu, theta.sigma, x) / x.size


def default_box(sample) -> ParamBox:
    x = _values(sample)
    lo, hi = float(x.min()), float(x.max())
    rng = hi - lo
    if not rng > 0:
        raise DegenerateSampleError("all observations are equal")
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25)
    if not iqr > 0:
        iqr = rng
    return ParamBox((-0.45, 5.0), (lo - 10 * iqr, hi + 10 * iqr), (1e-8 * rng, 10 * rng))


def _gumbel_start(x: np.ndarray, box: ParamBox) -> np.ndarray:
    sd = float(np.std(x))
    sigma = sd * math.sqrt(6.0) / math.pi
    mu = float(np.mean(x)) - EULER_GAMMA * sigma
    return box.clip([0.1, mu, sigma])


class _Objective:
    """Mean negative log-likelihood in ``phi = (gamma, mu, log sigma)``, box enforced."""

    def __init__(self, x: np.ndarray, box: ParamBox):
        self.x = x
        self.n = x.size
        self.box = box
        self.lo = box.lower
        self.hi = box.upper
        self.evals = 0

    def theta(self, phi) -> np.ndarray:
        return np.array([phi[0], phi[1], math.exp(phi[2])])

    def loglik(self, t) -> float:
        if np.any(t < self.lo) or np.any(t > self.hi):
            return -math.inf
        self.evals += 1
        return kernels.loglik_sum(t[0], t[1], t[2], self.x) / self.n

    def __call__(self, phi) -> float:
        if not np.all(np.isfinite(phi)) or phi[2] > 700:
            return math.inf
        return -self.loglik(self.theta(phi))

    def grad(self, t) -> tuple[float, np.ndarray]:
        self.evals += 1
        ll, s = kernels.loglik_score_sum(t[0], t[1], t[2], self.x)
        return ll / self.n, s / self.n


def _feasible_start(obj: _Objective, x: np.ndarray, box: ParamBox) -> np.ndarray:
    t = _gumbel_start(x, box)
    if math.isfinite(obj.loglik(t)):
        return t
    t0 = t.copy()
    t0[0] = np.clip(0.0, *box.gamma_range)
    if math.isfinite(obj.loglik(t0)):
        return t0
    # coarse scan of the box, nearest feasible point to the moment start
    grids = [np.linspace(lo, hi, 9) for lo, hi in zip(box.lower, box.upper)]
    g, m, s = np.meshgrid(*grids, indexing="ij")
    cand = np.stack([g.ravel(), m.ravel(), s.ravel()], axis=1)
    scale = np.maximum(box.upper - box.lower, 1e-300)
    order = np.lexsort((cand[:, 2], cand[:, 1], cand[:, 0], np.abs((cand - t) / scale).sum(axis=1)))
    for c in cand[order]:
        if math.isfinite(obj.loglik(c)):
            return c
    raise InfeasibleBoxError("no parameter in the box keeps every observation in the support")


def _start_points(obj: _Objective, t0: np.ndarray, n_starts: int) -> list[np.ndarray]:
    starts = [t0]
    for p in _PERTURBATIONS[: max(n_starts - 1, 0)]:
        base = np.array([t0[0], t0[1], math.log(t0[2])])
        step = np.array([p[0], p[1] * t0[2], p[2]])
        for _ in range(6):
            t = obj.box.clip(obj.theta(base + step))
            if math.isfinite(obj.loglik(t)):
                starts.append(t)
                break
            step = step / 2
    return starts


def _initial_simplex(obj: _Objective, t: np.ndarray) -> np.ndarray:
    phi = np.array([t[0], t[1], math.log(t[2])])
    steps = np.array([0.05, 0.1 * t[2], 0.1])
    simplex = [phi]
    for j in range(3):
        s = steps[j]
        for _ in range(30):
            v = phi.copy()
            v[j] += s
            if math.isfinite(obj(v)):
                break
            v[j] = phi[j] - s
            if math.isfinite(obj(v)):
                break
            s /= 2
        simplex.append(v)
    return np.array(simplex)


def _nelder_mead(obj: _Objective, t: np.ndarray, opts: FitOptions) -> tuple[np.ndarray, list[float], int]:
    history: list[float] = []

    def cb(xk):
        history.append(-obj(xk))

    res = minimize(
        obj,
        np.array([t[0], t[1], math.log(t[2])]),
        method="Nelder-Mead",
        callback=cb,
        options={
            "initial_simplex": _initial_simplex(obj, t),
            "xatol": opts.nm_xatol,
            "fatol": opts.nm_fatol,
            "maxiter": opts.nm_maxiter,
            "maxfev": 4 * opts.nm_maxiter,
        },
    )
    return obj.theta(res.x), history, int(res.nit)


def _at_bound(t: np.ndarray, box: ParamBox) -> np.ndarray:
    tol = 1e-10 * np.maximum(1.0, np.abs(box.upper - box.lower))
    return (t - box.lower <= tol) | (box.upper - t <= tol)


def _free_gradient(t, g, box) -> tuple[np.ndarray, np.ndarray]:
    """Gradient with components pushing out of the box zeroed; returns (g_free, blocked)."""
    tol = 1e-10 * np.maximum(1.0, np.abs(box.upper - box.lower))
    at_lo = t - box.lower <= tol
    at_hi = box.upper - t <= tol
    blocked = (at_lo & (g < 0)) | (at_hi & (g > 0))
    return np.where(blocked, 0.0, g), blocked


def _hessian(obj: _Objective, t: np.ndarray, h: float) -> np.ndarray | None:
    H = np.empty((3, 3))
    for j in range(3):
        d = h * max(1.0, abs(t[j])) if j == 0 else h * t[2]
        tp, tm = t.copy(), t.copy()
        tp[j] += d
        tm[j] -= d
        llp, gp = obj.grad(tp)
        llm, gm = obj.grad(tm)
        if not (math.isfinite(llp) and math.isfinite(llm)):
            return None
        H[:, j] = (gp - gm) / (2 * d)
    return 0.5 * (H + H.T)


def _newton_polish(obj: _Objective, t: np.ndarray, opts: FitOptions, history: list[float]):
    ll, g = obj.grad(t)
    iters = 0
    for _ in range(opts.newton_maxiter):
        gf, blocked = _free_gradient(t, g, obj.box)
        if np.abs(gf).max() < opts.grad_tol * 1e-2:
            break
        H = _hessian(obj, t, opts.fd_step)
        if H is None:
            break
        free = ~blocked
        step = np.zeros(3)
        try:
            Hf = H[np.ix_(free, free)]
            if np.all(np.linalg.eigvalsh(Hf) < 0):
                step[free] = -np.linalg.solve(Hf, g[free])
            else:
                step[free] = gf[free] * 1e-2
        except np.linalg.LinAlgError:
            break
        accepted = False
        lam = 1.0
        for _ in range(30):
            tn = obj.box.clip(t + lam * step)
            lln = obj.loglik(tn)
            if math.isfinite(lln) and lln >= ll:
                accepted = True
                break
            lam /= 2
        if not accepted:
            break
        iters += 1
        t = tn
        ll, g = obj.grad(t)
        history.append(ll)
    return t, ll, g, iters


def _single_start(obj: _Objective, t0: np.ndarray, opts: FitOptions):
    t_nm, history, nit = _nelder_mead(obj, t0, opts)
    if not math.isfinite(obj.loglik(t_nm)):
        t_nm = t0
    t, ll, g, nit2 = _newton_polish(obj, t_nm, opts, history)
    return t, ll, g, nit + nit2, history


def fit(sample, box: ParamBox | None = None, options: FitOptions | None = None) -> FitResult:
    """Maximize the mean log-likelihood over ``box`` (data-adaptive default)."""
    opts = options or FitOptions()
    x = _values(sample)
    n = x.size
    if n < 4:
        raise DegenerateSampleError(f"need at least 4 observations, got {n}")
    if not np.all(np.isfinite(x)):
        raise InvalidParameterError("sample contains non-finite values")
    if float(x.max()) == float(x.min()):
        raise DegenerateSampleError("all observations are equal; the likelihood is unbounded")
    notes: list[str] = []
    if n < 10:
        warnings.warn(f"small sample (n={n})", SmallSampleWarning, stacklevel=2)
        notes.append("small-sample")
    box = box or default_box(x)
    obj = _Objective(x, box)
    t_init = _feasible_start(obj, x, box)
    ll_init = obj.loglik(t_init)

    runs = []
    for t0 in _start_points(obj, t_init, opts.n_starts):
        runs.append(_single_start(obj, t0, opts))
    # best log-likelihood first, then lexicographic on theta
    order = sorted(range(len(runs)), key=lambda i: (-runs[i][1], tuple(runs[i][0])))
    t, ll, g, iters, history = runs[order[0]]
    multimodal = False
    for i in order[1:]:
        ti, lli = runs[i][0], runs[i][1]
        if abs(lli - ll) <= opts.multimodal_loglik_tol and np.abs(ti - t).max() > opts.multimodal_param_tol:
            multimodal = True
    if multimodal:
        notes.append("multimodal")

    gf, blocked = _free_gradient(t, g, box)
    bhit = _at_bound(t, box)
    grad_norm = float(np.abs(g).max())
    converged = bool(math.isfinite(ll) and np.abs(gf).max() < opts.grad_tol)
    if bhit.any():
        notes.append("boundary")
    result = FitResult(
        theta_hat=Theta.from_array(t),
        loglik=float(ll),
        grad_norm=grad_norm,
        iterations=int(iters),
        converged=converged,
        stderr=np.full(3, np.nan),
        boundary_hit=tuple(bool(b) for b in bhit),
        n=int(n),
        multimodal=multimodal,
        warnings=notes,
        history=history,
        loglik_init=float(ll_init),
        box=box,
    )
    if converged and not bhit.any() and t[0] > -0.5 + NEAR_SINGULAR_WIDTH:
        try:
            result.stderr = standard_errors(result, n)
        except (FitError, np.linalg.LinAlgError):
            pass
    return result


def standard_errors(result: FitResult, n: int) -> np.ndarray:
    """``sqrt(diag(I(theta_hat)^-1) / n)``."""
    if any(result.boundary_hit):
        raise FitError("standard errors need an interior estimate")
    if not result.converged:
        raise FitError("standard errors need a converged fit")
    info = fisher_information(result.theta_hat)
    if info.near_singular:
        raise FitError("Fisher information is near singular at theta_hat")
    inv = info.inverse()
    d = np.diag(inv) / float(n)
    if not np.all(d > 0) or not np.all(np.isfinite(d)):
        raise FitError("Fisher information inverse is not positive definite")
    return np.sqrt(d)


def linearization_residual(sample, theta0, result: FitResult, info=None) -> float:
    """``|| sqrt(n)(theta_hat - theta0) - I^-1 n^-1/2 sum score(theta0, x_i) ||_inf``."""
    theta0 = as_theta(theta0)
    x = _values(sample)
    n = x.size
    if info is None:
        info = fisher_information(theta0)
    entries = info.entries if hasattr(info, "entries") else np.asarray(info)
    ll, s = kernels.loglik_score_sum(theta0.gamma, theta0.mu, theta0.sigma, x)
    if not math.isfinite(ll):
        raise OutOfSupportError("some observations lie outside the support of theta0")
    lhs = math.sqrt(n) * (result.theta_hat.as_array() - theta0.as_array())
    rhs = np.linalg.solve(entries, s / math.sqrt(n))
    return float(np.abs(lhs - rhs).max())


def expected_m_criterion(theta, theta0) -> float:
    """``E_theta0 m_theta`` by quadrature over ``y = log u`` under theta0."""
    from ._pair import log_ratio

    theta, theta0 = as_theta(theta), as_theta(theta0)

    def f(y):
        dl = log_ratio(theta0, theta, y)
        with np.errstate(invalid="ignore"):
            m = 2.0 * (np.logaddexp(0.0, dl) - math.log(2.0))
        return m * np.exp(y - np.exp(y))

    y_min = -600.0 if theta0.gamma <= 1 else -600.0 / theta0.gamma
    brk = _pair_breaks(theta0, theta)
    r1 = integrate(f, y_min, 0.0, breakpoints=[b for b in brk if b < 0])
    r2 = integrate(lambda u: f(np.log(u)) / u, 1.0, 100.0,
                   breakpoints=[math.exp(b) for b in brk if 0 < b < math.log(100.0)])
    return float(r1.value + r2.value)


def _pair_breaks(theta0: Theta, theta1: Theta) -> list[float]:
    from ._pair import endpoint_in_log_u

    b = endpoint_in_log_u(theta0, theta1)
    return [] if b is None else [b]
