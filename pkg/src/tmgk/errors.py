"""Exception hierarchy. Everything raised on bad input derives from ``TmgkError``."""
from __future__ import annotations


class TmgkError(Exception):
    """Base class for library errors."""


class NonPositiveLength(TmgkError, ValueError):
    pass


class NodeIdOutOfRange(TmgkError, ValueError):
    pass


class NonGenericLengths(TmgkError, ValueError):
    """Edge lengths collide, so the minimal spanning forest is not canonical."""

    def __init__(self, message: str, duplicates=(), graph_id: str | None = None):
        super().__init__(message)
        self.duplicates = list(duplicates)
        self.graph_id = graph_id


class SplitOutOfRange(TmgkError, ValueError):
    pass


class EmptyGraph(TmgkError, ValueError):
    pass


class DimensionExceedsBound(TmgkError, ValueError):
    pass


class BoundNotSmaller(TmgkError, ValueError):
    pass


class NotPsd(TmgkError, ValueError):
    pass


class DimensionMismatch(TmgkError, ValueError):
    pass


class InvalidParameters(TmgkError, ValueError):
    pass


class GenusExceedsComplete(InvalidParameters):
    pass


class EmptyDataset(TmgkError, ValueError):
    pass


class SingleClassInput(TmgkError, ValueError):
    pass


class TooFewSamples(TmgkError, ValueError):
    pass


class DimsExceedN(TmgkError, ValueError):
    pass


class MissingManifest(TmgkError, FileNotFoundError):
    pass


class ParseError(TmgkError, ValueError):
    def __init__(self, file, line: int | None, message: str):
        where = f"{file}" if line is None else f"{file}:{line}"
        super().__init__(f"{where}: {message}")
        self.file = str(file)
        self.line = line


class DuplicateId(TmgkError, ValueError):
    pass


class InconsistentIndicator(TmgkError, ValueError):
    pass


class MetadataMismatch(TmgkError, ValueError):
    pass
