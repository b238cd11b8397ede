"""Synthetic CAN traffic and fabricated-frame injection.

Benign traffic is a first-order Markov chain over a PID alphabet. Attacks
insert one fabricated frame after every ``rate`` legitimate frames inside a
frame interval, so ground truth is exact.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import IO

import numpy as np

from . import _kernels
from .can_log import CanFrame
from .errors import BadTransitionMatrix, IntervalOutOfRange

# speed reading "FFF" and RPM reading "FFFF", left-padded to whole bytes
SPEED_PAYLOAD = bytes.fromhex("0FFF")
RPM_PAYLOAD = bytes.fromhex("FFFF")
ALIEN_PID = "7DF"


def payload_from_hex(text: str) -> bytes:
    text = text.strip()
    if len(text) % 2:
        text = "0" + text
    return bytes.fromhex(text)


@dataclass(frozen=True)
class InjectionSpec:
    target_pid: str
    payload: bytes = RPM_PAYLOAD
    rate: int = 1
    start_frame: int = 0
    end_frame: int | None = None  # None = end of log
    seed: int = 0
    jitter: bool = False
    bus: str | None = None  # None = copy the preceding frame's channel

    def __post_init__(self):
        if self.rate < 1:
            raise ValueError(f"rate must be >= 1, got {self.rate}")
        if self.start_frame < 0:
            raise IntervalOutOfRange(f"start_frame {self.start_frame} < 0")
        if self.end_frame is not None and self.end_frame <= self.start_frame:
            raise IntervalOutOfRange(f"empty interval [{self.start_frame}, {self.end_frame})")
        if len(self.payload) > 8:
            raise ValueError("payload longer than 8 bytes")

    def insertion_points(self, n_frames: int) -> np.ndarray:
        """Original frame indices after which a fabricated frame goes."""
        end = n_frames if self.end_frame is None else self.end_frame
        if end > n_frames:
            raise IntervalOutOfRange(f"end_frame {end} beyond log of {n_frames} frames")
        if self.start_frame >= end:
            raise IntervalOutOfRange(f"empty interval [{self.start_frame}, {end})")
        return np.arange(self.start_frame + self.rate - 1, end, self.rate, dtype=np.int64)

    def expected_insertions(self, n_frames: int) -> int:
        end = n_frames if self.end_frame is None else self.end_frame
        return (end - self.start_frame) // self.rate


@dataclass(frozen=True)
class SyntheticTrafficSpec:
    pid_alphabet: tuple[str, ...]
    transition: np.ndarray
    inter_arrival: float = 0.001
    length: int = 10_000
    seed: int = 0
    bus: str = "can0"
    start_time: float = 1_600_000_000.0

    def __post_init__(self):
        object.__setattr__(self, "pid_alphabet", tuple(self.pid_alphabet))
        p = np.asarray(self.transition, dtype=np.float64)
        object.__setattr__(self, "transition", p)
        k = len(self.pid_alphabet)
        if k == 0 or p.shape != (k, k):
            raise BadTransitionMatrix(f"transition matrix shape {p.shape} for {k} PIDs")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise BadTransitionMatrix("transition probabilities must be finite and non-negative")
        rows = p.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > 1e-12):
            raise BadTransitionMatrix(f"row sums deviate from 1 by up to {np.abs(rows - 1).max():.3g}")
        if self.length < 2:
            raise ValueError(f"length must be >= 2, got {self.length}")
        if not self.inter_arrival > 0:
            raise ValueError("inter_arrival must be positive")


def default_pids(n: int) -> list[str]:
    return [f"{0x100 + 0x10 * i:03X}" for i in range(n)]


def schedule_matrix(n_pids: int, dominant: float = 0.995, n_alternatives: int = 2, seed: int = 0) -> np.ndarray:
    """Cyclic schedule PID i -> i+1 with rare deviations.

    Each row sends ``dominant`` of its mass to the next PID in the cycle and
    splits the rest evenly over ``n_alternatives`` other PIDs chosen with
    ``seed``.
    """
    rng = np.random.default_rng(seed)
    p = np.zeros((n_pids, n_pids))
    n_alt = min(n_alternatives, n_pids - 1)
    for i in range(n_pids):
        nxt = (i + 1) % n_pids
        p[i, nxt] = dominant if n_alt else 1.0
        if n_alt:
            others = [j for j in range(n_pids) if j != nxt]
            alt = rng.choice(others, size=n_alt, replace=False)
            p[i, alt] += (1.0 - dominant) / n_alt
    return p


def generate_benign(spec: SyntheticTrafficSpec) -> list[CanFrame]:
    rng = np.random.default_rng(spec.seed)
    k = len(spec.pid_alphabet)
    cum = np.cumsum(spec.transition, axis=1)
    cum[:, -1] = 1.0
    start = int(rng.integers(k))
    u = rng.random(spec.length)
    states = _kernels.markov_walk(np.ascontiguousarray(cum), u, start)
    # at least 2us apart so an injected frame always fits strictly between
    gaps = np.maximum(2, np.rint(rng.exponential(spec.inter_arrival * 1e6, spec.length)).astype(np.int64))
    gaps[0] = 0
    ts = int(round(spec.start_time * 1e6)) + np.cumsum(gaps)
    payloads = rng.integers(0, 256, size=(spec.length, 8), dtype=np.uint8)
    alphabet = spec.pid_alphabet
    return [
        CanFrame(int(t), spec.bus, alphabet[s], payloads[i].tobytes())
        for i, (t, s) in enumerate(zip(ts.tolist(), states.tolist()))
    ]


def _insert(frames: Sequence[CanFrame], after: np.ndarray, spec: InjectionSpec) -> tuple[list[CanFrame], list[int]]:
    rng = np.random.default_rng(spec.seed)
    jit = rng.random(after.size) if spec.jitter else None
    out: list[CanFrame] = []
    labels: list[int] = []
    k = 0
    n = len(frames)
    for i, f in enumerate(frames):
        out.append(f)
        labels.append(0)
        if k < after.size and after[k] == i:
            lo = f.timestamp_us
            hi = frames[i + 1].timestamp_us if i + 1 < n else lo + 2
            if hi - lo >= 2:
                if jit is None:
                    ts = lo + (hi - lo) // 2
                else:
                    ts = lo + 1 + int(jit[k] * (hi - lo - 1))
                    ts = min(ts, hi - 1)
            else:
                # no room strictly between; keep order with a tie
                ts = lo
            out.append(CanFrame(ts, spec.bus or f.bus, spec.target_pid, spec.payload))
            labels.append(1)
            k += 1
    return out, labels


def inject_frames(frames: Sequence[CanFrame], spec: InjectionSpec) -> tuple[list[CanFrame], list[int]]:
    """Insert fabricated frames; returns the new log and a 0/1 label per frame."""
    return _insert(frames, spec.insertion_points(len(frames)), spec)


def inject_bursts(
    frames: Sequence[CanFrame], spec: InjectionSpec, intervals: Iterable[tuple[int, int]]
) -> tuple[list[CanFrame], list[int]]:
    """Like :func:`inject_frames` over several disjoint ``[start, end)`` intervals."""
    pts = []
    last_end = -1
    for start, end in sorted(intervals):
        if start < last_end:
            raise IntervalOutOfRange(f"interval starting at {start} overlaps the previous one")
        sub = InjectionSpec(spec.target_pid, spec.payload, spec.rate, start, end, spec.seed, spec.jitter, spec.bus)
        pts.append(sub.insertion_points(len(frames)))
        last_end = end
    after = np.concatenate(pts) if pts else np.empty(0, dtype=np.int64)
    return _insert(frames, after, spec)


def strip_injected(frames: Sequence[CanFrame], labels: Sequence[int]) -> list[CanFrame]:
    return [f for f, lab in zip(frames, labels) if not lab]


def write_labels(labels: Iterable[int], fh: IO[str]) -> None:
    for lab in labels:
        fh.write("1\n" if lab else "0\n")


def read_labels(fh: IO[str]) -> list[int]:
    out = []
    for lineno, line in enumerate(fh, start=1):
        s = line.strip()
        if not s:
            continue
        if s not in ("0", "1"):
            raise ValueError(f"label file line {lineno}: expected 0 or 1, got {s!r}")
        out.append(int(s))
    return out
