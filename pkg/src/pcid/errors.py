"""Exception hierarchy shared by all modules."""


class PcidError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PcidError, ValueError):
    """A vertex, window or parameter lies outside its admissible domain."""


class ValidationError(PcidError, ValueError):
    """A graph or template set violates a structural invariant."""


class QueryError(PcidError, ValueError):
    """An identification query is malformed (e.g. overlapping X and Y)."""


class PreconditionError(PcidError, ValueError):
    """An operation was called outside the hypotheses it relies on."""


class RefusalError(PcidError, RuntimeError):
    """The requested computation exceeds a configured budget.

    ``constant`` carries the lookback constant when the refusal comes from a
    window that would have to be unrolled to cover it.
    """

    def __init__(self, message: str, constant: int | None = None):
        super().__init__(message)
        self.constant = constant
