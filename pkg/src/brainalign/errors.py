"""Exception hierarchy shared by all pipeline stages.

Three branches mirror the CLI exit codes: configuration problems (exit 2),
malformed or mismatched input data (exit 3), and numerical failures such as
singular designs or degenerate variances (exit 4).
"""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PipelineError):
    """Invalid run configuration (bad key, missing path, unusable value)."""


class DataError(PipelineError):
    """Malformed, inconsistent, or missing input data."""


class BadMagicError(DataError):
    """Tensor file does not start with the expected magic bytes."""


class TruncatedPayloadError(DataError):
    """Tensor file ends before the declared payload is complete."""


class UnsupportedRankError(DataError):
    """Tensor file declares a dimensionality outside the supported 1..4."""


class NumericalError(PipelineError):
    """A computation cannot proceed (singularity, degenerate variance)."""


class SingularDesignError(NumericalError):
    """Design or Gram matrix is rank deficient; no pseudo-inverse fallback."""


class DegenerateVarianceError(NumericalError):
    """An operation requires strictly positive variance and got none."""
