"""GEV maximum likelihood and numerical checks of its regularity conditions."""
__version__ = "0.1.0"

from .errors import (
    DegenerateSampleError,
    FitError,
    GevError,
    InfeasibleBoxError,
    InformationUndefinedError,
    InvalidParameterError,
    OutOfSupportError,
)
from .gev_core import Sample, StdPoint, Theta, cdf, log_density, pdf, quantile, sample, u_gamma
from .score import score, score_array
from .fisher import FisherMatrix, fisher_information, fisher_information_mc
from .support_geometry import common_support, mass_outside
from .mle import FitOptions, FitResult, ParamBox, fit, neg_loglik
from .dqm_verify import DqmReport, dqm_certify, dqm_remainder
from .mc_harness import SimConfig, SimReport, run_simulation

__all__ = [
    "__version__",
    "Theta", "StdPoint", "Sample", "u_gamma", "pdf", "log_density", "cdf", "quantile", "sample",
    "score", "score_array", "FisherMatrix", "fisher_information", "fisher_information_mc",
    "common_support", "mass_outside", "ParamBox", "FitOptions", "FitResult", "fit", "neg_loglik",
    "DqmReport", "dqm_certify", "dqm_remainder", "SimConfig", "SimReport", "run_simulation",
    "GevError", "InvalidParameterError", "OutOfSupportError", "InformationUndefinedError",
    "DegenerateSampleError", "InfeasibleBoxError", "FitError",
]
