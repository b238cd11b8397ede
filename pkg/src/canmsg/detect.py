"""Detectors over a similarity series.

``threshold_detect`` flags every pair whose similarity falls strictly below
a cutoff. ``change_point_detect`` fits a single mean-shift switch model by
MCMC and reports how strongly the mean moved.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import IO

import numpy as np

from . import _kernels
from .errors import SeriesTooShort, SingleClass, ZeroMeanAverage
from .similarity import SimilaritySeries

DEFAULT_THRESHOLD = 0.87
DEFAULT_STRENGTH_THRESHOLD = 1.0


def _confusion(pred: np.ndarray, labels: np.ndarray) -> dict[str, int]:
    pred = np.asarray(pred, dtype=bool)
    labels = np.asarray(labels, dtype=bool)
    return {
        "tp": int(np.sum(pred & labels)),
        "fp": int(np.sum(pred & ~labels)),
        "tn": int(np.sum(~pred & ~labels)),
        "fn": int(np.sum(~pred & labels)),
    }


@dataclass
class ThresholdVerdicts:
    threshold: float
    verdicts: np.ndarray  # True = attack
    counts: dict[str, int] | None = None

    @property
    def accuracy(self) -> float | None:
        if self.counts is None:
            return None
        c = self.counts
        total = sum(c.values())
        return (c["tp"] + c["tn"]) / total if total else float("nan")

    def to_csv(self, fh: IO[str], labels: np.ndarray | None = None) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair_index", "verdict", "label"])
        for i, v in enumerate(self.verdicts):
            lab = "" if labels is None else ("injected" if labels[i] else "benign")
            w.writerow([i, "attack" if v else "benign", lab])


def threshold_detect(series: SimilaritySeries, threshold: float = DEFAULT_THRESHOLD) -> ThresholdVerdicts:
    lo = 0.0 if series.metric.value == "cosine" else -1.0
    if not (lo <= threshold <= 1.0):
        raise ValueError(f"threshold {threshold} outside the {series.metric.value} range [{lo}, 1]")
    verdicts = series.values < threshold
    counts = None if series.labels is None else _confusion(verdicts, series.labels)
    return ThresholdVerdicts(float(threshold), verdicts, counts)


def threshold_candidates(values: np.ndarray) -> np.ndarray:
    distinct = np.unique(values)
    mids = (distinct[:-1] + distinct[1:]) / 2.0
    grid = np.arange(101) / 100.0
    return np.unique(np.concatenate([mids, grid]))


def threshold_accuracies(values: np.ndarray, labels: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Accuracy of the strict ``value < t`` rule for every candidate ``t``."""
    labels = np.asarray(labels, dtype=bool)
    inj = np.sort(values[labels])
    ben = np.sort(values[~labels])
    inj_below = np.searchsorted(inj, candidates, side="left")
    ben_at_or_above = ben.size - np.searchsorted(ben, candidates, side="left")
    return (inj_below + ben_at_or_above) / values.size


def calibrate_threshold(series: SimilaritySeries) -> tuple[float, float]:
    """Sweep candidate cutoffs and keep the most accurate one.

    Candidates are the midpoints between sorted distinct values plus the
    grid 0.00, 0.01, ..., 1.00. Ties go to the larger cutoff.
    """
    if series.labels is None:
        raise SingleClass("series carries no labels")
    labels = series.labels
    if labels.all() or not labels.any():
        raise SingleClass("labels are all one class")
    cands = threshold_candidates(series.values)
    acc = threshold_accuracies(series.values, labels, cands)
    best = acc.max()
    # cands is sorted ascending, so the last maximiser is the largest
    idx = np.flatnonzero(acc == best)[-1]
    return float(cands[idx]), float(best)


# --------------------------------------------------------------------------
# change-point detection


def strength_of_change(mu_before: float, mu_after: float) -> float:
    """Mean shift relative to the average of the two means, in percent."""
    avg = (mu_before + mu_after) / 2.0
    if avg == 0.0:
        raise ZeroMeanAverage("average of the two means is zero")
    return abs(mu_before - mu_after) / abs(avg) * 100.0


@dataclass(frozen=True)
class CpdConfig:
    samples: int = 20_000
    burn_in: int = 5_000
    seed: int = 0
    strength_threshold: float = DEFAULT_STRENGTH_THRESHOLD
    adapt_every: int = 50
    target_accept: float = 0.4

    def __post_init__(self):
        if self.samples < 1 or self.burn_in < 0:
            raise ValueError("samples must be positive and burn_in non-negative")
        if self.adapt_every < 1:
            raise ValueError("adapt_every must be positive")


@dataclass
class ChangePointEstimate:
    tau_posterior: np.ndarray
    tau_point: int
    mu_before: float
    mu_after: float
    sigma: float
    strength_of_change: float
    changed: bool
    acceptance: dict[str, float] = field(default_factory=dict, compare=False)
    step_sizes: dict[str, float] = field(default_factory=dict, compare=False)

    def summary(self) -> dict:
        return {
            "tau_posterior": [int(c) for c in self.tau_posterior],
            "tau_point": int(self.tau_point),
            "mu_before": float(self.mu_before),
            "mu_after": float(self.mu_after),
            "sigma": float(self.sigma),
            "strength_of_change": float(self.strength_of_change),
            "changed": bool(self.changed),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.summary(), indent=indent)

    def posterior_csv(self, fh: IO[str]) -> None:
        total = int(self.tau_posterior.sum())
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "count", "probability"])
        for t, c in enumerate(self.tau_posterior):
            w.writerow([t, int(c), repr(float(c) / total if total else 0.0)])


_PARAMS = ("mu_before", "mu_after", "sigma", "tau")


def change_point_detect(series: SimilaritySeries | np.ndarray, config: CpdConfig | None = None) -> ChangePointEstimate:
    """Single change-point fit of a Normal mean-shift model.

    ``values[t] ~ N(mu_before, sigma)`` for ``t < tau`` and ``N(mu_after, sigma)``
    otherwise, with ``tau`` uniform on ``[0, n-1]``, both means
    ``N(mean, 2*std)`` and ``sigma`` half-normal with scale ``std``. Sampled by
    Metropolis-within-Gibbs; step sizes adapt during burn-in only.
    """
    config = config or CpdConfig()
    x = np.asarray(series.values if isinstance(series, SimilaritySeries) else series, dtype=np.float64)
    n = x.size
    if n < 8:
        raise SeriesTooShort(f"need at least 8 values, got {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    mean = float(np.mean(x))
    sd = float(np.std(x, ddof=1))
    if np.ptp(x) == 0.0:  # the float sd of a constant series need not be exactly 0
        post = np.zeros(n, dtype=np.int64)
        post[0] = config.samples
        return ChangePointEstimate(post, 0, mean, mean, 0.0, 0.0, False)

    rng = np.random.default_rng(config.seed)
    total = config.burn_in + config.samples
    z = rng.standard_normal((total, 4))
    u = 1.0 - rng.random((total, 4))  # (0, 1], keeps log(u) finite
    init = np.array([0.0, 0.0, sd, n // 2], dtype=np.float64)
    steps = np.array([0.1 * sd, 0.1 * sd, 0.1 * sd, max(1.0, n / 10.0)])
    tr_tau, tr_mu1, tr_mu2, tr_sig, st, acc = _kernels.cpd_chain(
        x - mean, z, u, init, steps, config.burn_in, config.adapt_every, config.target_accept, 0.0, 2.0 * sd, sd
    )
    post = np.bincount(tr_tau, minlength=n).astype(np.int64)
    tau_point = int(min(n - 1, max(0, math.floor(float(np.mean(tr_tau)) + 0.5))))
    mu_before = float(np.mean(tr_mu1)) + mean
    mu_after = float(np.mean(tr_mu2)) + mean
    strength = strength_of_change(mu_before, mu_after)
    return ChangePointEstimate(
        tau_posterior=post,
        tau_point=tau_point,
        mu_before=mu_before,
        mu_after=mu_after,
        sigma=float(np.mean(tr_sig)),
        strength_of_change=strength,
        changed=strength > config.strength_threshold,
        acceptance={k: float(a) / config.samples for k, a in zip(_PARAMS, acc)},
        step_sizes={k: float(s) for k, s in zip(_PARAMS, st)},
    )


def config_dict(config: CpdConfig) -> dict:
    return asdict(config)
