"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for bad
configuration or arguments, and :class:`DataError` for inputs that are
well-formed requests over unusable data. The CLI maps them to exit codes
1 and 2 respectively.
"""

from __future__ import annotations


class ChildDetectError(Exception):
    """Base class for all package errors."""


class ValidationError(ChildDetectError):
    """Configuration or argument problem."""


class DataError(ChildDetectError):
    """The data cannot support the requested operation."""


class ParseError(DataError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class OrderError(DataError):
    def __init__(self, line_no: int, t: int, previous: int):
        self.line_no = line_no
        self.t = t
        self.previous = previous
        super().__init__(f"line {line_no}: timestamp {t} precedes {previous}")


class EmptyStream(DataError):
    pass


class TooFewSamples(DataError):
    pass


class DegenerateStroke(DataError):
    pass


class SingleClass(DataError):
    pass


class EmptyData(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class MissingFeature(DataError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"feature {name!r} not present")


class EmptySide(DataError):
    pass


class CorruptModel(DataError):
    pass


class VersionMismatch(DataError):
    pass


class LeakageError(ChildDetectError):
    """A cross-validation isolation guard was violated."""


class EmptyMask(ValidationError):
    pass


class InvalidProfile(ValidationError):
    pass
