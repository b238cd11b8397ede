"""Detection scoring and Welch's two-sample t-test."""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .errors import LengthMismatch, TooFewSamples, ZeroVariance

DETECTORS = ("threshold", "cpd", "lstm")


@dataclass
class DetectionReport:
    verdicts: np.ndarray
    labels: np.ndarray
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    false_positive_rate: float
    fpr_defined: bool
    detector: str = "threshold"
    metric: str | None = None
    parameters: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def summary(self) -> dict:
        return {
            "detector": self.detector,
            "metric": self.metric,
            "parameters": self.parameters,
            "total": self.total,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "accuracy": self.accuracy,
            "false_positive_rate": None if not self.fpr_defined else self.false_positive_rate,
            "false_positive_rate_defined": self.fpr_defined,
            "pair_labeling": "a similarity pair is injected if either of its two windows holds an injected frame",
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.summary(), indent=indent)

    def one_line(self) -> str:
        fpr = f"{self.false_positive_rate:.4f}" if self.fpr_defined else "n/a"
        return f"{self.detector}: accuracy={self.accuracy:.4f} fpr={fpr} (tp={self.tp} fp={self.fp} tn={self.tn} fn={self.fn})"


def _as_bool(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype.kind in "US":
        return np.isin(arr, ["attack", "injected", "1", "True", "true"])
    return arr.astype(bool)


def score(verdicts, labels, *, detector: str = "threshold", metric: str | None = None, parameters: dict | None = None) -> DetectionReport:
    """Confusion counts of ``verdicts`` (True = attack) against ``labels`` (True = injected).

    With no negative labels the false-positive rate is NaN and
    ``fpr_defined`` is False.
    """
    v = _as_bool(verdicts)
    y = _as_bool(labels)
    if v.shape != y.shape:
        raise LengthMismatch(f"{v.size} verdicts for {y.size} labels")
    tp = int(np.sum(v & y))
    fp = int(np.sum(v & ~y))
    tn = int(np.sum(~v & ~y))
    fn = int(np.sum(~v & y))
    total = tp + fp + tn + fn
    acc = (tp + tn) / total if total else float("nan")
    negatives = fp + tn
    fpr = fp / negatives if negatives else float("nan")
    return DetectionReport(v, y, tp, fp, tn, fn, acc, fpr, negatives > 0, detector, metric, dict(parameters or {}))


def write_sweep_csv(rows: Iterable[tuple[int, str, DetectionReport]], fh: IO[str]) -> None:
    """One row per (window_size, metric, report)."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["window_size", "metric", "detector", "accuracy", "false_positive_rate", "tp", "fp", "tn", "fn"])
    for window_size, metric, rep in rows:
        fpr = repr(rep.false_positive_rate) if rep.fpr_defined else ""
        w.writerow([window_size, metric, rep.detector, repr(rep.accuracy), fpr, rep.tp, rep.fp, rep.tn, rep.fn])


# --------------------------------------------------------------------------
# Student-t tail via the regularized incomplete beta function

_FPMIN = 1e-300
_EPS = 1e-16
_MAX_ITER = 100_000


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _ln_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def reg_incomplete_beta(a: float, b: float, x: float, one_minus_x: float | None = None) -> float:
    """I_x(a, b). Pass ``one_minus_x`` when it is known more accurately than ``1 - x``."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    y = 1.0 - x if one_minus_x is None else one_minus_x
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log(y) - _ln_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, y) / b


def student_t_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isnan(t) or df <= 0:
        return float("nan")
    if math.isinf(t):
        return 0.0
    t2 = t * t
    x = df / (df + t2)
    y = t2 / (df + t2)
    return min(1.0, reg_incomplete_beta(df / 2.0, 0.5, x, y))


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    pvalue: float
    df: float

    def __iter__(self):
        yield self.statistic
        yield self.pvalue

    def formatted_p(self) -> str:
        return format_p(self.pvalue)


def format_p(p: float) -> str:
    return f"{p:.2e}"


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Unequal-variance two-sample t-test with Welch-Satterthwaite df."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    na, nb = a.size, b.size
    if na < 2 or nb < 2:
        raise TooFewSamples(f"need at least 2 values per sample, got {na} and {nb}")
    ma = math.fsum(a) / na
    mb = math.fsum(b) / nb
    va = math.fsum((a - ma) ** 2) / (na - 1)
    vb = math.fsum((b - mb) ** 2) / (nb - 1)
    if va == 0.0 or vb == 0.0:
        raise ZeroVariance("a sample has zero variance")
    qa = va / na
    qb = vb / nb
    se2 = qa + qb
    t = (ma - mb) / math.sqrt(se2)
    df = se2 * se2 / (qa * qa / (na - 1) + qb * qb / (nb - 1))
    return TTestResult(t, student_t_two_sided(t, df), df)
