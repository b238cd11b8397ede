"""Reading and windowing candump-style CAN logs.

One record per line::

    (1600000000.123456) can0 264#11223344

Timestamps are kept as integer microseconds so that a frame survives a
format/parse round trip exactly.
"""

from __future__ import annotations

import io
import os
import re
import warnings
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation
from typing import IO

from .errors import (
    BadTimestamp,
    IoFailure,
    MalformedLine,
    OddHexLength,
    OutOfOrder,
    ParseError,
    PayloadTooLong,
    WindowTooSmall,
)

MAX_PAYLOAD_BYTES = 8
MAX_PID_DIGITS = 8
BENIGN = "benign"
INJECTED = "injected"

_LINE_RE = re.compile(
    r"^\((?P<ts>[^()]*)\)[ \t]+(?P<bus>[^\s#()]+)[ \t]+(?P<pid>[^\s#]+)#(?P<data>\S*)$"
)
_TS_RE = re.compile(r"^\d+\.\d+$")
_HEX_RE = re.compile(r"^[0-9A-Fa-f]*$")
_MICRO = Decimal("0.000001")


@dataclass(frozen=True, slots=True)
class CanFrame:
    timestamp_us: int
    bus: str
    pid: str
    payload: bytes = b""

    def __post_init__(self):
        if self.timestamp_us < 0:
            raise BadTimestamp(f"negative timestamp {self.timestamp_us}us")
        if not self.bus or any(c.isspace() for c in self.bus):
            raise MalformedLine(f"bad channel name {self.bus!r}")
        if not (0 < len(self.pid) <= MAX_PID_DIGITS) or not _HEX_RE.match(self.pid):
            raise MalformedLine(f"bad PID {self.pid!r}")
        if self.pid != self.pid.upper():
            object.__setattr__(self, "pid", self.pid.upper())
        if len(self.payload) > MAX_PAYLOAD_BYTES:
            raise PayloadTooLong(f"payload of {len(self.payload)} bytes")

    @property
    def timestamp(self) -> float:
        """Seconds since the epoch."""
        return self.timestamp_us / 1_000_000

    @classmethod
    def from_seconds(cls, seconds: float, bus: str, pid: str, payload: bytes = b"") -> CanFrame:
        return cls(round(seconds * 1_000_000), bus, pid, bytes(payload))


def format_line(frame: CanFrame) -> str:
    sec, us = divmod(frame.timestamp_us, 1_000_000)
    return f"({sec}.{us:06d}) {frame.bus} {frame.pid}#{frame.payload.hex().upper()}"


def _parse_timestamp(text: str, lineno: int | None, line: str) -> int:
    if not _TS_RE.match(text):
        raise BadTimestamp(f"bad timestamp {text!r}", lineno, line)
    try:
        us = (Decimal(text) / _MICRO).quantize(Decimal(1), rounding=ROUND_HALF_EVEN)
    except InvalidOperation as exc:  # pragma: no cover - regex already guards this
        raise BadTimestamp(f"bad timestamp {text!r}", lineno, line) from exc
    return int(us)


def parse_line(line: str, lineno: int | None = None) -> CanFrame:
    """Decode one candump record.

    Raises a :class:`~canmsg.errors.ParseError` subclass carrying ``lineno``
    for anything that is not a well-formed classic CAN record.
    """
    text = line.strip()
    m = _LINE_RE.match(text)
    if m is None:
        raise MalformedLine("does not match '(TIMESTAMP) CHANNEL PID#DATA'", lineno, line)
    ts_us = _parse_timestamp(m["ts"], lineno, line)
    pid = m["pid"]
    if not _HEX_RE.match(pid) or len(pid) > MAX_PID_DIGITS:
        raise MalformedLine(f"bad PID {pid!r}", lineno, line)
    data = m["data"]
    if not _HEX_RE.match(data):
        raise MalformedLine(f"non-hex payload {data!r}", lineno, line)
    if len(data) > 2 * MAX_PAYLOAD_BYTES:
        raise PayloadTooLong(f"{len(data)} hex digits, at most 16 allowed", lineno, line)
    if len(data) % 2:
        raise OddHexLength(f"{len(data)} hex digits is not a whole number of bytes", lineno, line)
    return CanFrame(ts_us, m["bus"], pid.upper(), bytes.fromhex(data))


class SkippedLineWarning(UserWarning):
    """Emitted in lenient mode for every line that failed to parse."""

    def __init__(self, error: ParseError):
        self.error = error
        self.lineno = error.lineno
        self.line = error.line
        self.reason = type(error).__name__
        super().__init__(f"skipped {error}")


def _iter_lines(source) -> Iterator[str]:
    if isinstance(source, (str, os.PathLike)):
        try:
            fh = open(source, "rb")
        except OSError as exc:
            raise IoFailure(f"cannot open {os.fspath(source)}: {exc.strerror}") from exc
        with fh:
            yield from _iter_lines(fh)
        return
    try:
        for raw in source:
            if isinstance(raw, bytes):
                try:
                    raw = raw.decode("utf-8")
                except UnicodeDecodeError:
                    # a bare NUL can never match the grammar, so it surfaces as MalformedLine
                    raw = "\x00"
            yield raw
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def read_log(source: str | os.PathLike | IO | Iterable[str], *, strict: bool = False) -> Iterator[CanFrame]:
    """Yield frames from a candump log in file order.

    ``source`` may be a path, a binary or text stream, or any iterable of
    lines. Blank lines and ``#`` comments are skipped. In lenient mode each
    malformed line produces a :class:`SkippedLineWarning`; in strict mode the
    first one is raised.
    """
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            yield parse_line(text, lineno)
        except ParseError as exc:
            exc.line = raw.rstrip("\r\n")
            if strict:
                raise
            warnings.warn(SkippedLineWarning(exc), stacklevel=2)


def load_log(source, *, strict: bool = False, channel: str | None = None) -> list[CanFrame]:
    frames = list(read_log(source, strict=strict))
    if channel is not None:
        frames = select_channel(frames, channel)
    return frames


def select_channel(frames: Iterable[CanFrame], channel: str) -> list[CanFrame]:
    return [f for f in frames if f.bus == channel]


def write_log(frames: Iterable[CanFrame], dest: IO[str], header: str | None = None) -> None:
    if header:
        for hline in header.splitlines():
            dest.write(f"# {hline}\n")
    for f in frames:
        dest.write(format_line(f))
        dest.write("\n")


def dumps_log(frames: Iterable[CanFrame], header: str | None = None) -> str:
    buf = io.StringIO()
    write_log(frames, buf, header)
    return buf.getvalue()


@dataclass(frozen=True)
class FrameWindow:
    index: int
    frames: tuple[CanFrame, ...]
    label: str | None = None

    def __post_init__(self):
        ts = [f.timestamp_us for f in self.frames]
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise OutOfOrder(f"window {self.index}: timestamps decrease")

    @property
    def pids(self) -> list[str]:
        return [f.pid for f in self.frames]

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class Windowing:
    windows: list[FrameWindow] = field(default_factory=list)
    discarded: int = 0
    window_size: int = 0
    stride: int = 0


def window_starts(n_frames: int, window_size: int, stride: int | None = None) -> range:
    if window_size < 2:
        raise WindowTooSmall(f"window_size must be >= 2, got {window_size}")
    stride = window_size if stride is None else stride
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if n_frames < window_size:
        return range(0)
    return range(0, n_frames - window_size + 1, stride)


def windowize(
    frames: Sequence[CanFrame],
    window_size: int,
    stride: int | None = None,
    labels: Sequence[int] | None = None,
) -> Windowing:
    """Cut ``frames`` into consecutive windows of exactly ``window_size``.

    The trailing remainder is dropped and counted in ``discarded``. With
    per-frame ``labels`` (0/1), a window is ``"injected"`` if it holds any
    injected frame.
    """
    stride = window_size if stride is None else stride
    starts = window_starts(len(frames), window_size, stride)
    if labels is not None and len(labels) != len(frames):
        raise ValueError(f"{len(labels)} labels for {len(frames)} frames")
    out = []
    for i, s in enumerate(starts):
        label = None
        if labels is not None:
            label = INJECTED if any(labels[s : s + window_size]) else BENIGN
        out.append(FrameWindow(i, tuple(frames[s : s + window_size]), label))
    used = starts[-1] + window_size if len(starts) else 0
    return Windowing(out, len(frames) - used, window_size, stride)
