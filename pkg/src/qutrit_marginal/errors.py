"""Exception hierarchy shared by all modules."""


class QutritMarginalError(Exception):
    pass


class DomainError(QutritMarginalError, ValueError):
    """Input outside the operation's domain (bad axis, non-unitary matrix, ...)."""


class RangeError(QutritMarginalError, ValueError):
    """Requested value lies outside the attainable range."""


class RegionError(QutritMarginalError):
    """Target E-point is not in the region a constructive family covers."""


class DegenerateSimplexError(QutritMarginalError):
    pass


class NotInHullError(QutritMarginalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InfeasibleError(QutritMarginalError):
    """Target is not a member of the feasible set; carries the membership report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
