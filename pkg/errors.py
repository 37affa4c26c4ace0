"""Exception hierarchy shared by the library, the CLI and the HTTP routes."""
from typing import Optional, Tuple


class KemenyError(Exception):
    """Base class for every error raised on purpose by this project."""


class InputError(KemenyError, ValueError):
    """Malformed rankings, elections, trees, specs or files."""


class BudgetError(KemenyError):
    """A configured computational budget would be exceeded."""

    def __init__(self, budget: str, limit, requested):
        self.budget = budget
        self.limit = limit
        self.requested = requested
        super().__init__(f"{budget} budget exceeded: requested {requested}, limit {limit}")

    def __reduce__(self):
        # process pools pickle exceptions back to the parent
        return type(self), (self.budget, self.limit, self.requested)


class CertificateError(InputError):
    """A domain certificate does not hold for the election it is attached to."""

    def __init__(self, message: str, pair: Optional[Tuple[int, int]] = None):
        self.pair = pair
        super().__init__(message)


class DegenerateEmbeddingError(InputError):
    """Candidate points are not in general position."""

    def __init__(self, detail: str):
        super().__init__(f"degenerate embedding ({detail}); resample the candidate points")


class ElectionFormatError(InputError):
    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(prefix + message)


class InvariantError(KemenyError, AssertionError):
    """An internal cross-check failed; this is a bug, not a bad input."""
