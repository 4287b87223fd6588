"""Exception types shared across the package.

InputError covers violated mathematical preconditions (bad curve data,
unsupported field towers, malformed divisors).  InternalError marks a
broken internal invariant: if one of these escapes, it is a bug here,
not in the caller's data.
"""


class BeldiError(Exception):
    pass


class InputError(BeldiError):
    """A precondition on user-supplied data does not hold."""


class InternalError(BeldiError):
    """An internal consistency check failed."""
