"""Exception types shared across the toolkit."""

from __future__ import annotations


class CanMsgError(Exception):
    """Base class for every error raised by canmsg."""


class ParseError(CanMsgError, ValueError):
    """A log line could not be decoded. ``lineno`` is 1-based, or None."""

    def __init__(self, message: str, lineno: int | None = None, line: str | None = None):
        self.lineno = lineno
        self.line = line
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(f"{where}{message}")


class MalformedLine(ParseError):
    pass


class OddHexLength(ParseError):
    pass


class PayloadTooLong(ParseError):
    pass


class BadTimestamp(ParseError):
    pass


class IoFailure(CanMsgError, OSError):
    pass


class WindowTooSmall(CanMsgError, ValueError):
    pass


class LengthMismatch(CanMsgError, ValueError):
    pass


class ZeroVector(CanMsgError, ValueError):
    pass


class ConstantVector(CanMsgError, ValueError):
    pass


class TooFewGraphs(CanMsgError, ValueError):
    pass


class SingleClass(CanMsgError, ValueError):
    pass


class SeriesTooShort(CanMsgError, ValueError):
    pass


class ZeroMeanAverage(CanMsgError, ValueError):
    pass


class MetricMismatch(CanMsgError, ValueError):
    pass


class TooShort(CanMsgError, ValueError):
    pass


class NonFiniteInput(CanMsgError, ValueError):
    pass


class DivergedNonFinite(CanMsgError, ArithmeticError):
    def __init__(self, epoch: int, message: str = "parameters became non-finite"):
        self.epoch = epoch
        super().__init__(f"epoch {epoch}: {message}")


class BadTransitionMatrix(CanMsgError, ValueError):
    pass


class IntervalOutOfRange(CanMsgError, ValueError):
    pass


class TooFewSamples(CanMsgError, ValueError):
    pass


class ZeroVariance(CanMsgError, ValueError):
    pass


class CheckpointError(CanMsgError, ValueError):
    pass


class OutOfOrder(CanMsgError, ValueError):
    pass
