"""Exception types shared across the package."""


class AttackprintsError(Exception):
    """Base class for all package errors."""


class InvalidInputError(AttackprintsError):
    """An argument violates an operation's precondition (shape, range, length)."""


class FormatError(AttackprintsError):
    """A file failed to parse: bad magic, truncation, or count mismatch."""


class ConfigError(AttackprintsError):
    """A configuration is inconsistent or incomplete."""


class IntegrityError(AttackprintsError):
    """A persisted artifact does not match its recorded hash."""
