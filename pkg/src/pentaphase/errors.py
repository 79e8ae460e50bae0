"""Exception types shared across the package."""


class Error(Exception):
    """Base class for all package errors."""


class DegenerateEdge(Error):
    """Two consecutive vertices coincide; relative angles are undefined."""


class NotClosed(Error):
    """Closure residual exceeds tolerance; the five-bar chain does not close."""


class Inconsistent(Error):
    """Angle sum is not near any admissible value (1 + 2k)*pi."""


class DomainError(Error):
    """Curve parameter outside its interval."""


class Ambiguous(Error):
    """A point sits exactly on a fundamental-region boundary.

    Not raised by default: canonicalize resolves ties deterministically by
    picking the lexicographically smallest group element among the near-best
    candidates.  Defined so callers can implement stricter policies.
    """


class NoCrossing(Error):
    """A seeding ray left the chart without a sign change of B."""


class NoClosure(Error):
    """Contour integration exhausted its budget without returning to the seed."""


class DriftExceeded(Error):
    """Projection failed to restore the conserved quantities after a step."""


class ChartExit(Error):
    """Chart-based tracer approached the alpha3 gluing and stopped.

    Carries the partial arc traced so far in the ``arc`` attribute
    (an object with ``t``, ``alpha`` and ``alpha_dot`` arrays).
    """

    def __init__(self, message, arc=None):
        super().__init__(message)
        self.arc = arc


class ChartError(Error):
    """Requested disc or ray leaves the single-chart region."""


class OpenLoop(Error):
    """Loop endpoints do not match; a closed curve is required."""


class PhaseConventionError(Error):
    """Residual sine content shows the loop time origin is not the even one."""


class ConvergenceFailure(Error):
    """Newton iteration failed to converge."""
