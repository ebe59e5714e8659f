"""Exception types shared across the toolkit."""

from __future__ import annotations


class CiteEvalError(Exception):
    """Base class for all toolkit errors."""


class CorpusFormatError(CiteEvalError):
    """A dataset or predictions file violates its documented schema."""


class BackendUnavailableError(CiteEvalError):
    """A remote backend could not be reached after exhausting retries."""


class ProtocolError(CiteEvalError):
    """A remote backend replied with something we cannot interpret."""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class EnumerationCapError(CiteEvalError):
    """A citation or reference set is too large to enumerate subsets for."""

    def __init__(self, message: str, statement_index: int | None = None):
        super().__init__(message)
        self.statement_index = statement_index
