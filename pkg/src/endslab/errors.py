"""Exception hierarchy shared by all modules.

Every error carries the exit status the command-line front end maps it to.
"""


class EndsLabError(Exception):
    exit_code = 2


class InputError(EndsLabError, ValueError):
    """Malformed, non-canonical or out-of-range input."""

    exit_code = 2


class ResourceError(EndsLabError, RuntimeError):
    """An enumeration would exceed the configured point cap."""

    exit_code = 3

    def __init__(self, message, cap=None):
        super().__init__(message)
        self.cap = cap


class EmptyDomainError(InputError):
    """The exploration horizon does not reach past the forbidden region."""


class InconclusiveError(EndsLabError, RuntimeError):
    """The finite horizon is too small to decide the question asked."""

    exit_code = 1
