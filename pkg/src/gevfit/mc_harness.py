"""Monte Carlo study of the MLE: bias, covariance, coverage and linearization.

Each replicate ``(n, r)`` draws its own sample from a generator keyed on
``(seed, n, r)``, so replicates can run in any order or process and the
aggregates, computed after sorting by ``(n, r)``, are identical.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import jsonio
from .errors import DegenerateSampleError, GevError, InvalidParameterError
from .fisher import fisher_information
from .gev_core import Theta, as_theta, sample
from .mle import FitOptions, ParamBox, fit, linearization_residual

__all__ = [
    "SimConfig",
    "SimReport",
    "NormalityStats",
    "run_simulation",
    "run_replicate",
    "normality_diagnostics",
    "standardize_errors",
    "thread_count",
    "CSV_COLUMNS",
]

MAX_FAILURE_RATE = 0.05
CSV_COLUMNS = (
    "n", "r", "gamma_hat", "mu_hat", "sigma_hat", "loglik", "converged",
    "boundary", "failed", "residual",
)


def thread_count(requested: int | None = None) -> int:
    """Worker count: explicit request, else ``GEVFIT_THREADS``, else 1."""
    if requested is None:
        env = os.environ.get("GEVFIT_THREADS")
        requested = int(env) if env else 1
    return max(1, int(requested))


@dataclass(frozen=True)
class SimConfig:
    theta0: Theta
    n_grid: tuple[int, ...]
    replicates: int
    seed: int
    box: ParamBox | None = None
    ci_level: float = 0.95

    def __post_init__(self):
        object.__setattr__(self, "theta0", as_theta(self.theta0))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.theta0.gamma > -0.5:
            raise InvalidParameterError("theta0: gamma must be > -1/2")
        if int(self.replicates) < 100:
            raise InvalidParameterError("replicates: must be >= 100")
        if not self.n_grid or any(n < 4 for n in self.n_grid):
            raise InvalidParameterError("n_grid: sample sizes must be >= 4")
        if not 0.0 < float(self.ci_level) < 1.0:
            raise InvalidParameterError("ci_level: must lie in (0, 1)")
        if int(self.seed) < 0:
            raise InvalidParameterError("seed: must be a nonnegative integer")
        object.__setattr__(self, "replicates", int(self.replicates))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "ci_level", float(self.ci_level))

    def to_dict(self) -> dict:
        t = self.theta0
        return {
            "theta0": [t.gamma, t.mu, t.sigma],
            "n_grid": list(self.n_grid),
            "replicates": self.replicates,
            "seed": self.seed,
            "box": None if self.box is None else self.box.to_dict(),
            "ci_level": self.ci_level,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        known = {"theta0", "n_grid", "replicates", "seed", "box", "ci_level"}
        unknown = set(d) - known
        if unknown:
            raise InvalidParameterError(f"{sorted(unknown)[0]}: unknown field")
        for key in ("theta0", "n_grid", "replicates", "seed"):
            if key not in d:
                raise InvalidParameterError(f"{key}: missing")
        try:
            theta0 = Theta.from_array(d["theta0"])
        except (TypeError, ValueError) as exc:
            raise InvalidParameterError(f"theta0: {exc}") from exc
        box = d.get("box")
        try:
            box = None if box is None else ParamBox.from_dict(box)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParameterError(f"box: {exc}") from exc
        for key in ("replicates", "seed"):
            if not isinstance(d[key], int) or isinstance(d[key], bool):
                raise InvalidParameterError(f"{key}: must be an integer")
        if not isinstance(d["n_grid"], list) or not all(
            isinstance(n, int) and not isinstance(n, bool) for n in d["n_grid"]
        ):
            raise InvalidParameterError("n_grid: must be a list of integers")
        return cls(theta0, tuple(d["n_grid"]), d["replicates"], d["seed"], box,
                   float(d.get("ci_level", 0.95)))


@dataclass
class NormalityStats:
    anderson_darling: np.ndarray
    skewness: np.ndarray
    excess_kurtosis: np.ndarray
    covariance: np.ndarray
    cov_distance: float
    covariance_ok: bool

    def to_dict(self) -> dict:
        return {
            "anderson_darling": self.anderson_darling.tolist(),
            "skewness": self.skewness.tolist(),
            "excess_kurtosis": self.excess_kurtosis.tolist(),
            "covariance": self.covariance.tolist(),
            "cov_distance": self.cov_distance,
            "covariance_ok": self.covariance_ok,
        }


@dataclass
class SizeSummary:
    n: int
    replicates: int
    failures: int
    boundary_hits: int
    bias: np.ndarray
    covariance: np.ndarray
    frobenius_distance: float
    relative_frobenius: float
    coverage: np.ndarray
    median_residual: float
    median_error: float
    median_scaled_error: float
    normality: NormalityStats | None
    scaled_errors: np.ndarray = field(repr=False, default=None)

    @property
    def failure_rate(self) -> float:
        return self.failures / self.replicates

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "replicates": self.replicates,
            "failures": self.failures,
            "boundary_hits": self.boundary_hits,
            "failure_rate": self.failure_rate,
            "bias": self.bias.tolist(),
            "covariance": self.covariance.tolist(),
            "frobenius_distance": self.frobenius_distance,
            "relative_frobenius": self.relative_frobenius,
            "coverage": self.coverage.tolist(),
            "median_linearization_residual": self.median_residual,
            "median_error_maxnorm": self.median_error,
            "median_scaled_error_maxnorm": self.median_scaled_error,
            "normality": None if self.normality is None else self.normality.to_dict(),
        }


@dataclass
class SimReport:
    config: SimConfig
    fisher: np.ndarray
    fisher_inverse: np.ndarray
    sizes: list[SizeSummary]
    rows: list[dict]

    @property
    def valid(self) -> bool:
        return all(s.failure_rate <= MAX_FAILURE_RATE for s in self.sizes)

    def by_n(self, n: int) -> SizeSummary:
        for s in self.sizes:
            if s.n == n:
                return s
        raise KeyError(n)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "valid": self.valid,
            "max_failure_rate": MAX_FAILURE_RATE,
            "fisher": self.fisher.tolist(),
            "fisher_inverse": self.fisher_inverse.tolist(),
            "sizes": [s.to_dict() for s in self.sizes],
            "tolerances_note": "numeric bands are engineering choices calibrated by simulation",
        }

    def to_json(self) -> str:
        return jsonio.dumps(self.to_dict())

    def to_csv(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        for row in self.rows:
            lines.append(",".join(jsonio.csv_cell(row[c]) for c in CSV_COLUMNS))
        return "\n".join(lines) + "\n"


def run_replicate(theta0: Theta, n: int, r: int, seed: int, box: ParamBox | None,
                  info: np.ndarray, z_crit: float, options: FitOptions | None = None) -> dict:
    """Fit one replicate; never raises for fitting problems."""
    x = sample(theta0, n, (seed, n, r))
    row = {
        "n": n, "r": r, "gamma_hat": math.nan, "mu_hat": math.nan, "sigma_hat": math.nan,
        "loglik": math.nan, "converged": False, "boundary": False, "failed": True,
        "residual": math.nan, "cover": [False, False, False], "error": "",
    }
    try:
        res = fit(x, box, options)
    except GevError as exc:
        row["error"] = type(exc).__name__
        return row
    t = res.theta_hat.as_array()
    row.update(gamma_hat=t[0], mu_hat=t[1], sigma_hat=t[2], loglik=res.loglik * n,
               converged=res.converged, boundary=any(res.boundary_hit))
    if not res.converged or any(res.boundary_hit) or not np.all(np.isfinite(res.stderr)):
        return row
    try:
        row["residual"] = linearization_residual(x, theta0, res, info)
    except GevError as exc:
        row["error"] = type(exc).__name__
        return row
    half = z_crit * res.stderr
    row["cover"] = [bool(abs(t[j] - theta0.as_array()[j]) <= half[j]) for j in range(3)]
    row["failed"] = False
    return row


def _worker(args):
    return [run_replicate(*a) for a in args]


def standardize_errors(scaled_errors: np.ndarray, info: np.ndarray) -> np.ndarray:
    """Map ``sqrt(n)(theta_hat - theta0)`` rows through the symmetric root of ``I``."""
    vals, vecs = np.linalg.eigh(info)
    root = (vecs * np.sqrt(vals)) @ vecs.T
    return np.asarray(scaled_errors) @ root


def _anderson_darling(z: np.ndarray) -> float:
    z = np.sort(z)
    n = z.size
    i = np.arange(1, n + 1)
    lcdf = stats.norm.logcdf(z)
    lsf = stats.norm.logsf(z[::-1])
    return float(-n - np.sum((2 * i - 1) * (lcdf + lsf)) / n)


def normality_diagnostics(scaled_errors: np.ndarray, info: np.ndarray,
                          cov_tol: float = 0.15) -> NormalityStats:
    """Per-coordinate normality statistics of the standardized errors."""
    e = np.asarray(scaled_errors, dtype=float)
    if e.ndim != 2 or e.shape[1] != 3 or e.shape[0] < 2:
        raise InvalidParameterError("expected an (R, 3) array of errors")
    if np.any(np.ptp(e, axis=0) == 0):
        raise DegenerateSampleError("an error coordinate has zero variance")
    z = standardize_errors(e, info)
    c = z - z.mean(axis=0)
    sd = np.sqrt((c**2).mean(axis=0))
    skew = (c**3).mean(axis=0) / sd**3
    kurt = (c**4).mean(axis=0) / sd**4 - 3.0
    cov = np.cov(z, rowvar=False)
    dist = float(np.linalg.norm(cov - np.eye(3)) / np.linalg.norm(np.eye(3)))
    ad = np.array([_anderson_darling(z[:, j]) for j in range(3)])
    return NormalityStats(ad, skew, kurt, cov, dist, dist < cov_tol)


def _summarize(n: int, rows: list[dict], theta0: Theta, inv: np.ndarray, info: np.ndarray) -> SizeSummary:
    ok = [r for r in rows if not r["failed"]]
    t0 = theta0.as_array()
    est = np.array([[r["gamma_hat"], r["mu_hat"], r["sigma_hat"]] for r in ok]).reshape(-1, 3)
    err = est - t0
    scaled = math.sqrt(n) * err
    if len(ok) >= 2:
        cov = np.cov(scaled, rowvar=False)
        cov = 0.5 * (cov + cov.T)
    else:
        cov = np.full((3, 3), np.nan)
    frob = float(np.linalg.norm(cov - inv))
    cover = np.array([r["cover"] for r in ok], dtype=float).reshape(-1, 3)
    normality = None
    if len(ok) >= 500:
        normality = normality_diagnostics(scaled, info)
    maxnorm = np.abs(err).max(axis=1) if len(ok) else np.array([math.nan])
    return SizeSummary(
        n=n,
        replicates=len(rows),
        failures=len(rows) - len(ok),
        boundary_hits=sum(1 for r in rows if r["boundary"]),
        bias=err.mean(axis=0) if len(ok) else np.full(3, np.nan),
        covariance=cov,
        frobenius_distance=frob,
        relative_frobenius=frob / float(np.linalg.norm(inv)),
        coverage=cover.mean(axis=0) if len(ok) else np.full(3, np.nan),
        median_residual=float(np.median([r["residual"] for r in ok])) if ok else math.nan,
        median_error=float(np.median(maxnorm)),
        median_scaled_error=float(np.median(math.sqrt(n) * maxnorm)),
        normality=normality,
        scaled_errors=scaled,
    )


def run_simulation(config: SimConfig, threads: int | None = None,
                   options: FitOptions | None = None) -> SimReport:
    theta0 = config.theta0
    fm = fisher_information(theta0)
    info = fm.entries
    inv = fm.inverse()
    z_crit = float(stats.norm.ppf(0.5 + config.ci_level / 2))
    tasks = [
        (theta0, n, r, config.seed, config.box, info, z_crit, options)
        for n in config.n_grid
        for r in range(config.replicates)
    ]
    workers = thread_count(threads)
    if workers == 1:
        rows = [run_replicate(*t) for t in tasks]
    else:
        chunks = [tasks[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = [row for part in pool.map(_worker, chunks) for row in part]
    rows.sort(key=lambda row: (row["n"], row["r"]))
    sizes = []
    for n in config.n_grid:
        sub = [row for row in rows if row["n"] == n]
        sizes.append(_summarize(n, sub, theta0, inv, info))
    return SimReport(config, info, inv, sizes, rows)
