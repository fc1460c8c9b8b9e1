"""Exception types shared across the toolkit."""

from __future__ import annotations


class TatError(Exception):
    """Base class for all toolkit errors."""


class MarkerCollision(TatError):
    """Raw input text already contains the boundary marker character."""


class EncodingError(TatError):
    """Input bytes are not valid UTF-8."""


class ConfigError(TatError):
    """A parameter value violates a structural constraint."""


class CoverageError(TatError):
    """A string cannot be segmented because part of it matches no token."""


class DisconnectedLattice(TatError):
    """A lattice has no path from its start boundary to its end boundary."""


class UnknownTokenId(TatError):
    """A token id does not exist in the vocabulary."""


class DuplicateToken(TatError):
    """A vocabulary contains the same token string twice."""


class ZeroLength(TatError):
    """A token has zero length where a positive length is required."""


class SegmentationFailure(TatError):
    """The fallback or user-supplied segmenter produced no subwords."""


class DimensionMismatch(TatError):
    """Matrix shape does not agree with the vocabulary or plan."""


class PlanGap(TatError):
    """A mapping plan does not cover every newly added token id."""


class EmptyInput(TatError):
    """An operation that needs at least one item received none."""


class ConfigValidationError(TatError):
    """Aggregated configuration problems, each tagged with a field path."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = list(errors)
        lines = "; ".join(f"{path}: {msg}" for path, msg in self.errors)
        super().__init__(f"invalid configuration: {lines}")
