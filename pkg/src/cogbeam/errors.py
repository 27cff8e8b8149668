"""Exception hierarchy shared by all cogbeam modules."""


class CogbeamError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CogbeamError, ValueError):
    """Input failed a structural check (shape, symmetry, sign)."""


class DomainError(CogbeamError, ValueError):
    """Input is well formed but outside the mathematical domain of the op."""


class NumericError(CogbeamError, ArithmeticError):
    """An iterative routine did not reach its tolerance.

    Parameters
    ----------
    message : str
    residual : float, optional
        Last residual (off-diagonal norm, duality gap, ...) observed.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConditioningError(NumericError):
    """Matrix is too close to singular for a stable solve."""

    def __init__(self, message, min_eigenvalue):
        super().__init__(message, residual=min_eigenvalue)
        self.min_eigenvalue = min_eigenvalue


class SdpError(NumericError):
    """SDP solve failed; ``status`` is one of ``infeasible``, ``unbounded``,
    ``max_iter`` or ``numerical``."""

    def __init__(self, message, status, gap=None):
        super().__init__(message, residual=gap)
        self.status = status
        self.gap = gap


class CampaignAborted(CogbeamError):
    """Too many per-trial failures in a Monte Carlo campaign."""
