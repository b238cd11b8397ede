import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from canmsg.detect import (
    DEFAULT_THRESHOLD,
    CpdConfig,
    calibrate_threshold,
    change_point_detect,
    strength_of_change,
    threshold_accuracies,
    threshold_candidates,
    threshold_detect,
)
from canmsg.errors import SeriesTooShort, SingleClass, ZeroMeanAverage
from canmsg.similarity import SimilaritySeries

FAST = CpdConfig(samples=6000, burn_in=2000, seed=0)


def two_level(seed=0, shift=0.0):
    rng = np.random.default_rng(seed)
    return np.concatenate([rng.normal(0.95, 0.01, 200), rng.normal(0.80, 0.01, 200)]) + shift


def null_series(seed=0):
    return np.random.default_rng(seed).normal(0.95, 0.01, 400)


def series(values, labels=None, metric="cosine"):
    return SimilaritySeries(metric, np.asarray(values, float), 100, labels=labels)


# ---- threshold ----------------------------------------------------------


def test_default_threshold():
    assert DEFAULT_THRESHOLD == 0.87


def test_threshold_examples():
    assert threshold_detect(series([0.95, 0.80])).verdicts.tolist() == [False, True]
    assert threshold_detect(series([0.87])).verdicts.tolist() == [False]


def test_threshold_counts():
    v = threshold_detect(series([0.95, 0.80, 0.5, 0.9], labels=[False, True, False, True]))
    assert v.counts == {"tp": 1, "fp": 1, "tn": 1, "fn": 1}
    assert v.accuracy == 0.5
    buf = io.StringIO()
    v.to_csv(buf, np.array([False, True, False, True]))
    assert buf.getvalue().splitlines()[2] == "1,attack,injected"


def test_threshold_range_checked():
    with pytest.raises(ValueError):
        threshold_detect(series([0.5]), -0.2)
    threshold_detect(series([0.5], metric="pearson"), -0.2)


@given(
    st.lists(st.floats(-1, 1), min_size=1, max_size=40),
    st.floats(-1, 1),
    st.floats(-1, 1),
)
def test_threshold_monotone(values, t1, t2):
    lo, hi = sorted((t1, t2))
    s = series(values, metric="pearson")
    a = threshold_detect(s, lo).verdicts
    b = threshold_detect(s, hi).verdicts
    assert not (a & ~b).any()


def test_calibrate_separable():
    values = [0.95] * 5 + [0.60] * 5
    labels = [False] * 5 + [True] * 5
    t, acc = calibrate_threshold(series(values, labels))
    assert acc == 1.0
    assert 0.60 < t <= 0.95
    # the largest candidate that still separates: values at the cutoff count as benign
    assert t == 0.95


def test_calibrate_overlap_uses_best_midpoint():
    values = [0.10, 0.20, 0.35, 0.30, 0.50, 0.60]
    labels = [True, True, True, False, False, False]
    t, acc = calibrate_threshold(series(values, labels))
    assert acc == pytest.approx(5 / 6)
    cands = threshold_candidates(np.array(values))
    accs = [np.mean((np.array(values) < c) == np.array(labels)) for c in cands]
    best = max(accs)
    assert acc == best
    assert t == max(c for c, a in zip(cands, accs) if a == best)


def test_calibrate_single_class():
    with pytest.raises(SingleClass):
        calibrate_threshold(series([0.9, 0.8], [False, False]))
    with pytest.raises(SingleClass):
        calibrate_threshold(series([0.9, 0.8]))


@given(st.lists(st.tuples(st.floats(0, 1), st.booleans()), min_size=2, max_size=60))
def test_calibrate_is_exhaustive_best(pairs):
    values = np.array([p[0] for p in pairs])
    labels = np.array([p[1] for p in pairs])
    if labels.all() or not labels.any():
        return
    t, acc = calibrate_threshold(series(values, labels))
    for c in threshold_candidates(values):
        brute = np.mean((values < c) == labels)
        assert acc >= brute - 1e-15
    assert np.mean((values < t) == labels) == pytest.approx(acc)


def test_threshold_accuracies_vectorised():
    rng = np.random.default_rng(1)
    values = rng.random(50)
    labels = rng.random(50) < 0.4
    cands = threshold_candidates(values)
    fast = threshold_accuracies(values, labels, cands)
    slow = [np.mean((values < c) == labels) for c in cands]
    assert np.allclose(fast, slow)


# ---- strength of change -------------------------------------------------


def test_strength_examples():
    assert strength_of_change(10, 20) == pytest.approx(66.6666666667)
    assert strength_of_change(0.7, 0.7) == 0.0
    assert strength_of_change(0.9046, 0.8296) == pytest.approx(8.65, abs=0.005)


def test_strength_zero_average():
    with pytest.raises(ZeroMeanAverage):
        strength_of_change(0.5, -0.5)


# ---- change point -------------------------------------------------------


@pytest.mark.parametrize("seed", [0, 1])
def test_cpd_two_level(seed):
    est = change_point_detect(two_level(seed), CpdConfig(seed=seed))
    assert 190 <= est.tau_point <= 210
    assert abs(est.strength_of_change - 0.15 / 0.875 * 100) <= 1.0
    assert est.changed
    assert est.tau_posterior.sum() == 20_000 and est.tau_posterior.shape == (400,)


@pytest.mark.parametrize("seed", [0, 1])
def test_cpd_null(seed):
    est = change_point_detect(null_series(seed), CpdConfig(seed=seed))
    assert est.strength_of_change < 1.0
    assert not est.changed
    assert 0 <= est.tau_point < 400


def test_cpd_mirrored_halves():
    half = np.random.default_rng(5).normal(0.9, 0.01, 150)
    est = change_point_detect(np.concatenate([half, half[::-1]]), FAST)
    assert est.strength_of_change < 1.0


def test_cpd_reproducible():
    a = change_point_detect(two_level(3), FAST)
    b = change_point_detect(two_level(3), FAST)
    assert a.to_json() == b.to_json()
    assert a.acceptance == b.acceptance


def test_cpd_seed_matters():
    a = change_point_detect(null_series(), FAST)
    b = change_point_detect(null_series(), CpdConfig(samples=6000, burn_in=2000, seed=1))
    assert a.to_json() != b.to_json()


def test_cpd_shift_moves_means_not_argmax():
    base = change_point_detect(two_level(), FAST)
    moved = change_point_detect(two_level(shift=0.5), FAST)
    assert np.argmax(moved.tau_posterior) == np.argmax(base.tau_posterior)
    assert moved.mu_before - base.mu_before == pytest.approx(0.5, abs=2e-3)
    assert moved.mu_after - base.mu_after == pytest.approx(0.5, abs=2e-3)
    assert moved.strength_of_change < base.strength_of_change


def test_cpd_mu_sigma_acceptance_in_band():
    est = change_point_detect(two_level(), CpdConfig())
    for k in ("mu_before", "mu_after", "sigma"):
        assert 0.1 <= est.acceptance[k] <= 0.7, (k, est.acceptance[k])


@pytest.mark.xfail(strict=True, reason="the tau posterior is a near point mass; every +-1 move is rejected")
def test_cpd_tau_acceptance_in_band():
    est = change_point_detect(two_level(), CpdConfig())
    assert 0.1 <= est.acceptance["tau"] <= 0.7


def test_cpd_constant_series():
    est = change_point_detect(np.full(20, 0.9), FAST)
    assert est.strength_of_change == 0.0 and not est.changed and est.tau_point == 0


def test_cpd_too_short():
    with pytest.raises(SeriesTooShort):
        change_point_detect(np.ones(7), FAST)


def test_cpd_rejects_nan():
    with pytest.raises(ValueError):
        change_point_detect(np.array([0.1] * 9 + [np.nan]), FAST)


def test_cpd_strength_threshold_rule():
    est = change_point_detect(two_level(), CpdConfig(samples=4000, burn_in=1000, strength_threshold=50.0))
    assert est.strength_of_change < 50.0 and not est.changed


def test_cpd_summary_and_csv():
    est = change_point_detect(two_level(), FAST)
    doc = json.loads(est.to_json())
    assert set(doc) == {"tau_posterior", "tau_point", "mu_before", "mu_after", "sigma", "strength_of_change", "changed"}
    buf = io.StringIO()
    est.posterior_csv(buf)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "tau,count,probability" and len(rows) == 401
    assert sum(float(r.split(",")[2]) for r in rows[1:]) == pytest.approx(1.0)


def test_cpd_accepts_series_object():
    s = series(two_level())
    assert change_point_detect(s, FAST).tau_point == change_point_detect(two_level(), FAST).tau_point
