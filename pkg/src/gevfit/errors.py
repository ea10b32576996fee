"""Exception types raised by gevfit."""


class GevError(Exception):
    """Base class for all gevfit errors."""


class InvalidParameterError(GevError, ValueError):
    pass


class OutOfSupportError(GevError, ValueError):
    """An observation lies outside the support of the queried distribution."""


class InformationUndefinedError(GevError, ValueError):
    """Fisher information requested at a shape parameter <= -1/2."""


class DegenerateSampleError(GevError, ValueError):
    """The likelihood is unbounded (constant data or too few points)."""


class InfeasibleBoxError(GevError, ValueError):
    """No parameter in the search box keeps every observation in support."""


class FitError(GevError, RuntimeError):
    """A fit result cannot be used for the requested derived quantity."""
