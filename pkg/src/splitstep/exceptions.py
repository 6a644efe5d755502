"""Exception and warning types shared across the package.

The CLI maps these onto its exit-code contract: configuration and input
problems exit with 2, numerical failures (blow-up, tolerance not
attainable) exit with 3.
"""


class SplitstepError(Exception):
    """Base class for all package errors."""


class ConfigError(SplitstepError):
    """Bad user input: config files, scheme files, inconsistent arguments."""


class SchemeFileError(ConfigError):
    """Scheme coefficient file violates the documented grammar or checks."""


class RepresentationError(SplitstepError):
    """Field/grid mismatch: wrong space tag, wrong shape, wrong grid."""


class NumericalError(SplitstepError):
    """Base class for runtime numerical failures."""


class UnstableStepError(NumericalError):
    """A flow was asked for a substep it refuses (backward real diffusion)."""


class BlowUpError(NumericalError):
    """State left the regime where a flow is defined (pole or non-finite)."""


class ToleranceAbortError(NumericalError):
    """Adaptive stepping hit h_min and still cannot meet the tolerance."""


class ReferenceAccuracyError(NumericalError):
    """A reference solve could not reach the requested accuracy floor."""


class UnderResolvedWarning(UserWarning):
    """Modal tail of a field carries non-negligible energy."""


class DegeneratePairWarning(UserWarning):
    """An estimator pair whose members coincide; the estimate is vacuous."""
