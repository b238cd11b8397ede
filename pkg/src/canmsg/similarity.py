"""Similarity of consecutive message-sequence graphs.

Two metrics are supported, cosine similarity and Pearson correlation of
the zero-filled edge-count vectors. ``values[t]`` compares window ``t`` with
window ``t + 1``.
"""

from __future__ import annotations

import csv
import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from . import _kernels
from .can_log import BENIGN, INJECTED
from .errors import ConstantVector, LengthMismatch, TooFewGraphs, ZeroVector
from .msg_graph import MessageSequenceGraph, SparseWindowCounts, edge_vectors, window_counts


class Metric(str, enum.Enum):
    COSINE = "cosine"
    PEARSON = "pearson"

    def __str__(self) -> str:
        return self.value


def _as_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise LengthMismatch(f"vectors of length {x.size} and {y.size}")
    return x, y


def cosine_similarity(x, y) -> float:
    x, y = _as_pair(x, y)
    if x.size == 0:
        raise LengthMismatch("empty vectors")
    nx = math.sqrt(math.fsum(x * x))
    ny = math.sqrt(math.fsum(y * y))
    if nx == 0.0 or ny == 0.0:
        raise ZeroVector("cosine similarity of an all-zero vector is undefined")
    c = math.fsum(x * y) / (nx * ny)
    return min(1.0, max(-1.0, c))


def pearson_correlation(x, y) -> float:
    x, y = _as_pair(x, y)
    n = x.size
    if n < 2:
        raise ConstantVector(f"need at least 2 entries, got {n}")
    dx = x - math.fsum(x) / n
    dy = y - math.fsum(y) / n
    vx = math.fsum(dx * dx)
    vy = math.fsum(dy * dy)
    if vx == 0.0 or vy == 0.0:
        raise ConstantVector("correlation of a constant vector is undefined")
    r = math.fsum(dx * dy) / (math.sqrt(vx) * math.sqrt(vy))
    return min(1.0, max(-1.0, r))


_METRIC_FUNCS = {Metric.COSINE: cosine_similarity, Metric.PEARSON: pearson_correlation}


@dataclass
class SimilaritySeries:
    metric: Metric
    values: np.ndarray
    window_size: int
    stride: int | None = None
    labels: np.ndarray | None = None  # bool, True = injected
    degenerate: np.ndarray = field(default=None)

    def __post_init__(self):
        self.metric = Metric(self.metric)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.stride is None:
            self.stride = self.window_size
        if self.degenerate is None:
            self.degenerate = np.zeros(self.values.shape, dtype=bool)
        else:
            self.degenerate = np.asarray(self.degenerate, dtype=bool)
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=bool)
            if self.labels.shape != self.values.shape:
                raise LengthMismatch(f"{self.labels.size} labels for {self.values.size} values")

    def __len__(self) -> int:
        return self.values.size

    def valid_values(self) -> np.ndarray:
        return self.values[~self.degenerate]

    def to_csv(self, fh: IO[str]) -> None:
        fh.write(f"# window_size={self.window_size} stride={self.stride}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair_index", "metric", "value", "label", "degenerate_flag"])
        for i, v in enumerate(self.values):
            label = "" if self.labels is None else (INJECTED if self.labels[i] else BENIGN)
            w.writerow([i, self.metric.value, repr(float(v)), label, int(self.degenerate[i])])

    @classmethod
    def from_csv(cls, fh: IO[str]) -> SimilaritySeries:
        window_size = 0
        stride = None
        rows = []
        for line in fh:
            if line.startswith("#"):
                for tok in line[1:].split():
                    k, _, v = tok.partition("=")
                    if k == "window_size":
                        window_size = int(v)
                    elif k == "stride":
                        stride = int(v)
                continue
            if line.strip():
                rows.append(line)
        reader = csv.DictReader(rows)
        values, labels, flags, metrics = [], [], [], set()
        for row in reader:
            values.append(float(row["value"]))
            labels.append(row["label"])
            flags.append(row["degenerate_flag"].strip() in {"1", "true", "True"})
            metrics.add(row["metric"])
        if len(metrics) > 1:
            raise ValueError(f"mixed metrics in one series: {sorted(metrics)}")
        metric = metrics.pop() if metrics else Metric.PEARSON
        have_labels = bool(labels) and all(lab in (BENIGN, INJECTED) for lab in labels)
        lab_arr = np.array([lab == INJECTED for lab in labels], dtype=bool) if have_labels else None
        return cls(metric, np.array(values), window_size, stride, lab_arr, np.array(flags, dtype=bool))


def pair_labels(window_labels: Sequence[bool] | np.ndarray) -> np.ndarray:
    """A pair is injected when either of its two windows is."""
    wl = np.asarray(window_labels, dtype=bool)
    return wl[:-1] | wl[1:]


def similarity_series(
    graphs: Sequence[MessageSequenceGraph],
    metric: Metric | str = Metric.PEARSON,
    window_labels: Sequence[bool] | None = None,
    window_size: int | None = None,
) -> SimilaritySeries:
    """Score every consecutive pair of graphs.

    Pearson pairs with a constant edge vector are recorded as 0.0 and
    flagged in ``degenerate`` instead of aborting the run.
    """
    metric = Metric(metric)
    if len(graphs) < 2:
        raise TooFewGraphs(f"need at least 2 graphs, got {len(graphs)}")
    func = _METRIC_FUNCS[metric]
    values = np.empty(len(graphs) - 1)
    flags = np.zeros(len(graphs) - 1, dtype=bool)
    for t in range(len(graphs) - 1):
        x, y, _ = edge_vectors(graphs[t], graphs[t + 1])
        try:
            values[t] = func(x, y)
        except (ConstantVector, ZeroVector):
            values[t] = 0.0
            flags[t] = True
    if window_size is None:
        window_size = graphs[0].total + 1
    labels = None if window_labels is None else pair_labels(window_labels)
    return SimilaritySeries(metric, values, window_size, None, labels, flags)


def _values_from_moments(mom: np.ndarray, metric: Metric) -> tuple[np.ndarray, np.ndarray]:
    n, sx, sy, sxx, syy, sxy = (mom[:, i] for i in range(6))
    with np.errstate(divide="ignore", invalid="ignore"):
        if metric is Metric.COSINE:
            bad = (sxx == 0) | (syy == 0)
            vals = sxy / (np.sqrt(sxx.astype(np.float64)) * np.sqrt(syy.astype(np.float64)))
            vals = np.clip(vals, 0.0, 1.0)
        else:
            # integer moments keep the numerator and both variance terms exact
            num = n * sxy - sx * sy
            vx = n * sxx - sx * sx
            vy = n * syy - sy * sy
            bad = (vx <= 0) | (vy <= 0)
            vals = num / (np.sqrt(vx.astype(np.float64)) * np.sqrt(vy.astype(np.float64)))
            vals = np.clip(vals, -1.0, 1.0)
    vals = np.where(bad, 0.0, vals)
    return vals, bad


def series_from_counts(
    wc: SparseWindowCounts, metric: Metric | str = Metric.PEARSON, window_labels=None
) -> SimilaritySeries:
    metric = Metric(metric)
    if wc.n_windows < 2:
        raise TooFewGraphs(f"need at least 2 windows, got {wc.n_windows}")
    mom = _kernels.pair_moments(wc.edge_codes, wc.counts, wc.offsets)
    vals, bad = _values_from_moments(mom, metric)
    labels = None if window_labels is None else pair_labels(window_labels)
    return SimilaritySeries(metric, vals, wc.window_size, wc.stride, labels, bad)


def window_labels_from_frames(frame_labels, starts: np.ndarray, window_size: int) -> np.ndarray:
    lab = np.asarray(frame_labels, dtype=np.int64)
    csum = np.concatenate([[0], np.cumsum(lab != 0)])
    return (csum[starts + window_size] - csum[starts]) > 0


def series_from_pids(
    pids: Sequence[str],
    window_size: int,
    metric: Metric | str = Metric.PEARSON,
    stride: int | None = None,
    frame_labels: Sequence[int] | None = None,
) -> SimilaritySeries:
    """Bulk path: window, count and score a whole PID stream at once."""
    wc = window_counts(pids, window_size, stride)
    wl = None
    if frame_labels is not None:
        if len(frame_labels) != len(pids):
            raise LengthMismatch(f"{len(frame_labels)} labels for {len(pids)} frames")
        wl = window_labels_from_frames(frame_labels, wc.starts, window_size)
    return series_from_counts(wc, metric, wl)
