"""Failure types for the extraction tool."""


class ExtractionError(Exception):
    """Base for everything this package raises deliberately."""


class UnresolvedCheckpointError(ExtractionError):
    """Checkpoint id is neither a local directory nor a loadable model."""


class ContextLengthError(ExtractionError):
    """A sentence tokenizes past the model's position limit.

    The message always carries the offending sentence's index so the
    caller can fix or drop it.
    """
