"""Exception and warning types raised by the library."""


class NumericalError(RuntimeError):
    """A linear-algebra routine failed or returned an unusable result."""


class UnstableSystemError(NumericalError):
    """The drift matrix has an eigenvalue with non-negative real part, so no
    steady state exists."""

    def __init__(self, message, max_real_part=None, eigenvalues=None):
        super().__init__(message)
        self.max_real_part = max_real_part
        self.eigenvalues = eigenvalues


class IntegrationDivergence(NumericalError):
    """Transient covariance integration blew up."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class ConvergenceError(NumericalError):
    """Self-consistent iteration did not converge."""

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class MonogamyWarning(UserWarning):
    """A residual contangle came out negative beyond round-off."""
