"""Domain exceptions.

Each error carries a human-readable ``detail`` and the process exit code the
command line maps it to.
"""


class NilflowError(Exception):
    """Base class for all domain errors."""

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidMetricError(NilflowError):
    """The metric coefficients do not define a positive definite Hermitian form."""


class InvalidFrameError(NilflowError):
    """A complex frame is singular."""


class UnsupportedParametersError(NilflowError):
    """Parameters fall outside the gate an operation is defined on."""


class InvalidConfigError(NilflowError):
    """Command line or config-file input is invalid."""

    exit_code = 2


class IntegrationError(NilflowError):
    """A trajectory cannot be started from the given state."""


class VerificationFailure(NilflowError):
    """A closed-form oracle disagrees with the first-principles computation."""
