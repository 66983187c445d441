"""Exception hierarchy shared by every kslocal module."""

from __future__ import annotations


class KSError(Exception):
    """Base class for all library errors."""


class ZeroVector(KSError, ValueError):
    pass


class DegenerateInput(KSError, ValueError):
    """Raised when two vectors that must be independent are parallel."""


class OverlapMismatch(KSError, ValueError):
    pass


class PreconditionViolated(KSError, ValueError):
    pass


class DomainError(KSError, ValueError):
    pass


class UnknownObservable(KSError, KeyError):
    pass


class MalformedInput(KSError, ValueError):
    """Serialized data that does not follow the documented JSON layout."""


class GadgetError(KSError, RuntimeError):
    """A constructed gadget failed to realise its forcing contract."""


class DegenerateOverlap(KSError, ValueError):
    """The target commutes with (or equals) the prepared observable.

    This is not a failure of the construction: in that case the target is
    value definite, and ``classification`` says which value it is forced to.
    """

    def __init__(self, message: str, classification=None):
        super().__init__(message)
        self.classification = classification
