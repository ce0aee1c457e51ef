"""Exception types shared across the package."""


class RecoveryError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(RecoveryError, ValueError):
    """An input violates a documented precondition or invariant."""


class TruncationLeakError(RecoveryError):
    """Population reached the guarded top of the Fock ladder; results would be corrupted."""


class ZeroProbabilityError(RecoveryError):
    """The post-selected branch has vanishing probability, so the conditional state is undefined."""


class IntegrationQualityError(RecoveryError):
    """The master-equation integrator drifted beyond the allowed trace tolerance."""


class OptimizationFailedError(RecoveryError):
    """Every candidate measurement fell below the probability floor."""


class InternalConsistencyError(RecoveryError):
    """A quantity that must be real came out complex; indicates a bug upstream."""
