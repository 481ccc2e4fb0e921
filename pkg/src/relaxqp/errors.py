"""Exception types raised across the package."""


class QpError(Exception):
    """Base class for every error raised by relaxqp."""


class NotPositiveDefinite(QpError):
    """A Cholesky pivot fell at or below the pivot floor."""


class DimensionMismatch(QpError, ValueError):
    pass


class DivisionNearZero(QpError):
    """A denominator collapsed toward zero (loss of strict interiority)."""


class ValidationFailed(QpError, ValueError):
    """Problem data failed validation.

    ``issues`` holds every violation found, not just the first one.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


class KappaBelowCurrent(QpError, ValueError):
    """Relaxation target is below the iterate's duality measure."""

    def __init__(self, kappa, mu):
        self.kappa = kappa
        self.mu = mu
        super().__init__(
            f"kappa={kappa:.3e} is below the current duality measure mu={mu:.3e}; "
            "relaxation only moves up the central path"
        )


class RelaxationFailed(QpError):
    """Newton relaxation stopped without meeting the tolerance."""

    def __init__(self, status, message):
        self.status = status
        super().__init__(message)
