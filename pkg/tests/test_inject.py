import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canmsg.errors import BadTransitionMatrix, IntervalOutOfRange
from canmsg.inject import (
    ALIEN_PID,
    RPM_PAYLOAD,
    SPEED_PAYLOAD,
    InjectionSpec,
    SyntheticTrafficSpec,
    default_pids,
    generate_benign,
    inject_bursts,
    inject_frames,
    payload_from_hex,
    read_labels,
    schedule_matrix,
    strip_injected,
    write_labels,
)
from canmsg.similarity import series_from_pids

from .conftest import benign_log, frames_from_pids


def test_injected_payloads():
    assert SPEED_PAYLOAD == b"\x0f\xff" and RPM_PAYLOAD == b"\xff\xff"
    assert payload_from_hex("FFF") == SPEED_PAYLOAD


def test_alternating_chain():
    spec = SyntheticTrafficSpec(["A", "B"], [[0, 1], [1, 0]], length=50, seed=3)
    pids = [f.pid for f in generate_benign(spec)]
    assert all(a != b for a, b in zip(pids, pids[1:]))
    assert set(pids) == {"A", "B"}


def test_generator_deterministic():
    a = benign_log(2000, seed=4)
    assert a == benign_log(2000, seed=4)
    assert a != benign_log(2000, seed=5)


def test_generator_timestamps_strictly_increase():
    ts = [f.timestamp_us for f in benign_log(5000, seed=2)]
    assert all(b > a for a, b in zip(ts, ts[1:]))
    mean_gap = (ts[-1] - ts[0]) / (len(ts) - 1)
    assert mean_gap == pytest.approx(1000, rel=0.05)


def test_empirical_transitions_match_matrix():
    rng = np.random.default_rng(0)
    k = 5
    p = rng.random((k, k)) + 0.1
    p /= p.sum(axis=1, keepdims=True)
    p[:, -1] = 1.0 - p[:, :-1].sum(axis=1)
    pids = default_pids(k)
    frames = generate_benign(SyntheticTrafficSpec(pids, p, length=100_000, seed=11))
    idx = {pid: i for i, pid in enumerate(pids)}
    counts = np.zeros((k, k))
    for a, b in zip(frames, frames[1:]):
        counts[idx[a.pid], idx[b.pid]] += 1
    emp = counts / counts.sum(axis=1, keepdims=True)
    assert np.abs(emp - p).max() < 0.01


@pytest.mark.parametrize(
    "matrix",
    [[[0.5, 0.4], [0.5, 0.5]], [[1.0, 0.0]], [[1.5, -0.5], [0.5, 0.5]], [[np.nan, 1.0], [0.5, 0.5]]],
)
def test_bad_matrix(matrix):
    with pytest.raises(BadTransitionMatrix):
        SyntheticTrafficSpec(["A", "B"], matrix)


def test_schedule_matrix_rows():
    p = schedule_matrix(10, 0.995, 2, seed=3)
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12)
    assert all(p[i, (i + 1) % 10] >= 0.995 for i in range(10))
    assert ((p > 0).sum(axis=1) <= 3).all()


def test_rate_one_whole_log():
    frames = frames_from_pids(list("ABCDEABCDE"))
    out, labels = inject_frames(frames, InjectionSpec(ALIEN_PID))
    assert len(out) == 20 and labels == [0, 1] * 10
    assert all(f.pid == ALIEN_PID and f.payload == RPM_PAYLOAD for f, lab in zip(out, labels) if lab)


def test_rate_five():
    frames = frames_from_pids(list("ABCDEABCDE"))
    out, labels = inject_frames(frames, InjectionSpec("7DF", rate=5, start_frame=0, end_frame=10))
    assert sum(labels) == 2
    assert [i for i, lab in enumerate(labels) if lab] == [5, 11]


def test_strip_recovers_original():
    frames = benign_log(1000, seed=1)
    out, labels = inject_frames(frames, InjectionSpec("110", rate=3, start_frame=100, end_frame=900, jitter=True))
    assert strip_injected(out, labels) == frames


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 7),
    st.integers(0, 300),
    st.integers(1, 300),
    st.booleans(),
    st.integers(0, 5),
)
def test_monotone_and_label_count(rate, start, span, jitter, seed):
    frames = benign_log(400, seed=seed)
    end = min(400, start + span)
    if start >= end:
        return
    spec = InjectionSpec(ALIEN_PID, rate=rate, start_frame=start, end_frame=end, jitter=jitter, seed=seed)
    out, labels = inject_frames(frames, spec)
    ts = [f.timestamp_us for f in out]
    assert all(b > a for a, b in zip(ts, ts[1:]))  # generated gaps always leave room
    assert sum(labels) == spec.expected_insertions(len(frames)) == (end - start) // rate
    assert len(out) == len(frames) + sum(labels)


def test_tight_gap_keeps_order():
    frames = frames_from_pids(["A", "B", "C"], step_us=1)
    out, _ = inject_frames(frames, InjectionSpec("7DF"))
    ts = [f.timestamp_us for f in out]
    assert ts == sorted(ts)


def test_interval_checks():
    with pytest.raises(IntervalOutOfRange):
        inject_frames(frames_from_pids(list("ABC")), InjectionSpec("7DF", end_frame=4))
    with pytest.raises(IntervalOutOfRange):
        InjectionSpec("7DF", start_frame=5, end_frame=5)
    with pytest.raises(ValueError):
        InjectionSpec("7DF", rate=0)


def test_bursts():
    frames = benign_log(1000)
    out, labels = inject_bursts(frames, InjectionSpec("7DF"), [(100, 200), (500, 550)])
    assert sum(labels) == 150
    with pytest.raises(IntervalOutOfRange):
        inject_bursts(frames, InjectionSpec("7DF"), [(100, 200), (150, 250)])


def test_label_sidecar_round_trip():
    buf = io.StringIO()
    write_labels([0, 1, 1, 0], buf)
    assert buf.getvalue() == "0\n1\n1\n0\n"
    assert read_labels(io.StringIO(buf.getvalue())) == [0, 1, 1, 0]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_injection_disrupts_similarity(seed):
    base = benign_log(15_000, seed)
    out, labels = inject_frames(base, InjectionSpec(ALIEN_PID, start_frame=5000, end_frame=10_000))
    s = series_from_pids([f.pid for f in out], 50, "cosine", frame_labels=labels)
    assert s.values[s.labels].mean() < s.values[~s.labels].mean()
