from __future__ import annotations

import numpy as np
import pytest

from canmsg.can_log import CanFrame
from canmsg.inject import (
    ALIEN_PID,
    RPM_PAYLOAD,
    InjectionSpec,
    SyntheticTrafficSpec,
    default_pids,
    generate_benign,
    inject_frames,
    schedule_matrix,
)


def frames_from_pids(pids, bus="can0", t0_us=1_000_000, step_us=1000):
    return [CanFrame(t0_us + i * step_us, bus, p, bytes([i % 256])) for i, p in enumerate(pids)]


def benign_log(length: int, seed: int = 0, n_pids: int = 10):
    """Scheduled Markov traffic: each PID almost always hands over to the same successor."""
    spec = SyntheticTrafficSpec(default_pids(n_pids), schedule_matrix(n_pids, seed=seed), 0.001, length, seed)
    return generate_benign(spec)


def middle_third_attack(length: int = 50_000, seed: int = 0):
    """Benign log with one alien frame after every legitimate frame over the middle third."""
    base = benign_log(length, seed)
    spec = InjectionSpec(ALIEN_PID, RPM_PAYLOAD, rate=1, start_frame=length // 3, end_frame=2 * length // 3, seed=seed)
    return inject_frames(base, spec)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def attack_log():
    return middle_third_attack()
