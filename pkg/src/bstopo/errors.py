"""Exception hierarchy shared by all modules.

Every exception carries an ``exit_code`` so the CLI can map failures onto
its documented exit statuses without inspecting messages.
"""


class BstopoError(Exception):
    exit_code = 1


class FormatError(BstopoError, ValueError):
    """Input text or config does not match the expected layout."""

    exit_code = 2


class InsufficientDataError(BstopoError, ValueError):
    """Too few points, samples or blocks for the requested analysis."""

    exit_code = 3


class EmptySetError(InsufficientDataError):
    exit_code = 3


class DegeneracyError(BstopoError, ValueError):
    """Collinear or otherwise degenerate geometry."""

    exit_code = 3


class DomainError(BstopoError, ValueError):
    exit_code = 2


class InvariantError(BstopoError, AssertionError):
    """An internal consistency check failed. Never raised for bad input."""

    exit_code = 4


class OracleSizeError(BstopoError, ValueError):
    """Brute-force oracle asked to handle more simplices than its cap."""

    exit_code = 3
