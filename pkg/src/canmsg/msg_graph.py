"""Message-sequence graphs: per-window counts of PID-to-PID transitions."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from . import _kernels
from .can_log import CanFrame, FrameWindow, window_starts
from .errors import WindowTooSmall

Edge = tuple[str, str]


@dataclass(frozen=True)
class MessageSequenceGraph:
    """Directed multigraph stored as ``{(pid_prev, pid_next): count}``."""

    edges: Mapping[Edge, int]
    window_index: int = 0
    nodes: frozenset[str] = field(default=frozenset())

    def __post_init__(self):
        edges = dict(self.edges)
        for key, c in edges.items():
            if c < 1:
                raise ValueError(f"edge {key} has non-positive count {c}")
        nodes = set(self.nodes)
        for a, b in edges:
            nodes.add(a)
            nodes.add(b)
        object.__setattr__(self, "edges", MappingProxyType(edges))
        object.__setattr__(self, "nodes", frozenset(nodes))

    @property
    def total(self) -> int:
        return sum(self.edges.values())

    def sorted_edges(self) -> list[tuple[Edge, int]]:
        return sorted(self.edges.items())


def graph_from_pids(pids: Sequence[str], window_index: int = 0) -> MessageSequenceGraph:
    if len(pids) < 2:
        raise WindowTooSmall(f"need at least 2 messages for a graph, got {len(pids)}")
    counts = Counter(zip(pids, pids[1:]))
    return MessageSequenceGraph(counts, window_index, frozenset(pids))


def compute_msg(window: FrameWindow | Sequence[CanFrame]) -> MessageSequenceGraph:
    """Count each consecutive (pid, next pid) pair of a window once.

    Self-loops count like any other edge, so the counts always sum to
    ``len(window) - 1``.
    """
    if isinstance(window, FrameWindow):
        return graph_from_pids(window.pids, window.index)
    return graph_from_pids([f.pid for f in window])


def edge_vectors(g1: MessageSequenceGraph, g2: MessageSequenceGraph) -> tuple[np.ndarray, np.ndarray, list[Edge]]:
    """Align two graphs on the sorted union of their edges, zero-filling gaps."""
    keys = sorted(set(g1.edges) | set(g2.edges))
    x = np.array([g1.edges.get(k, 0) for k in keys], dtype=np.float64)
    y = np.array([g2.edges.get(k, 0) for k in keys], dtype=np.float64)
    return x, y, keys


def to_dot(g: MessageSequenceGraph, name: str = "msg") -> str:
    lines = [f"digraph {name} {{"]
    for node in sorted(g.nodes):
        lines.append(f'  "{node}";')
    for (a, b), c in g.sorted_edges():
        lines.append(f'  "{a}" -> "{b}" [label="{c}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Array form used by the bulk similarity path


def encode_pids(pids: Iterable[str]) -> tuple[np.ndarray, list[str]]:
    """Map PIDs to dense integer codes; the vocabulary is sorted."""
    pids = list(pids)
    vocab = sorted(set(pids))
    lookup = {p: i for i, p in enumerate(vocab)}
    return np.fromiter((lookup[p] for p in pids), dtype=np.int64, count=len(pids)), vocab


@dataclass
class SparseWindowCounts:
    """Edge counts of many windows in CSR-like layout.

    Row ``w`` holds the sorted edge codes ``edge_codes[offsets[w]:offsets[w+1]]``
    where ``code = prev * n_nodes + next``.
    """

    edge_codes: np.ndarray
    counts: np.ndarray
    offsets: np.ndarray
    vocab: list[str]
    window_size: int
    stride: int
    starts: np.ndarray

    @property
    def n_windows(self) -> int:
        return len(self.offsets) - 1

    def graph(self, w: int) -> MessageSequenceGraph:
        k = len(self.vocab)
        sl = slice(self.offsets[w], self.offsets[w + 1])
        edges = {(self.vocab[c // k], self.vocab[c % k]): int(n) for c, n in zip(self.edge_codes[sl], self.counts[sl])}
        return MessageSequenceGraph(edges, w)


def window_counts(pids: Sequence[str], window_size: int, stride: int | None = None) -> SparseWindowCounts:
    codes, vocab = encode_pids(pids)
    stride = window_size if stride is None else stride
    starts = np.asarray(window_starts(len(codes), window_size, stride), dtype=np.int64)
    ec, cnt, off = _kernels.window_edge_counts(codes, starts, window_size, max(len(vocab), 1))
    return SparseWindowCounts(ec, cnt, off, vocab, window_size, stride, starts)
