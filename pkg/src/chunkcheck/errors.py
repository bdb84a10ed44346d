"""Exception hierarchy shared across the package."""


class ChunkcheckError(Exception):
    """Base class for all package errors."""


class ValidationError(ChunkcheckError):
    """Bad input: malformed data, violated invariant, out-of-range value."""


class CorpusError(ValidationError):
    """Malformed corpus file. Carries path and 1-based line number when known."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        loc = ""
        if path is not None:
            loc = f"{path}: " if line is None else f"{path}:{line}: "
        super().__init__(f"{loc}{message}")


class PremiseTooLargeError(ValidationError):
    """Premise exceeds the backend's token budget; truncation is never silent."""


class BackendError(ChunkcheckError):
    """Scorer backend failed to produce a usable result.

    ``attempts`` counts transport attempts made before giving up.
    """

    def __init__(self, message, attempts=1, endpoint=None):
        self.attempts = attempts
        self.endpoint = endpoint
        super().__init__(message)


class ScoringError(ChunkcheckError):
    """A sentence could not be fully scored; partial results are attached."""

    def __init__(self, message, claim_id=None, partial=None, failures=None):
        self.claim_id = claim_id
        self.partial = partial if partial is not None else []
        self.failures = failures if failures is not None else []
        super().__init__(message)
