"""Exception taxonomy shared by the library and the CLI exit-code map."""


class EcdsError(Exception):
    """Base class for package errors."""


class ParameterError(EcdsError, ValueError):
    """Arguments are malformed or mutually inconsistent."""


class InfeasibleSizeError(EcdsError):
    """Requested parameters would need an impractically large object."""


class ConstructionError(EcdsError):
    """A randomized build exhausted its retry budget without verifying."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class VerificationError(EcdsError):
    """An encoding failed its stated per-index guarantee."""


class ProbeBudgetError(EcdsError, RuntimeError):
    """A decoder attempted to read more positions than its declared budget."""


class EnumerationLimitError(EcdsError):
    """An exact enumeration was requested over too large a randomness space."""
