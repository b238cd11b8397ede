"""Compare the numba kernels against their plain numpy/Python fallbacks.

Both variants are called directly, so the CANMSG_DISABLE_NUMBA flag does not
matter here. Each kernel's outputs are checked for equality before timing.

    python3 benchmarks/bench_kernels.py --frames 200000 --repeat 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from canmsg import _kernels
from canmsg._accel import jit_always
from canmsg.inject import schedule_matrix


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--frames", type=int, default=200_000)
    parser.add_argument("--window", type=int, default=100)
    parser.add_argument("--pids", type=int, default=40)
    parser.add_argument("--cpd-iters", type=int, default=25_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(42)
    cum = np.cumsum(schedule_matrix(args.pids, seed=1), axis=1)
    walk_u = rng.random(args.frames)
    codes = _kernels.markov_walk_py(cum, walk_u, 0)
    starts = np.arange(0, args.frames - args.window + 1, args.window, dtype=np.int64)
    ec, cnt, off = _kernels.window_edge_counts_numpy(codes, starts, args.window, args.pids)

    n_series = 600
    x = np.concatenate([rng.normal(0.95, 0.02, n_series // 2), rng.normal(0.80, 0.02, n_series // 2)])
    x = x - x.mean()
    sd = float(x.std(ddof=1))
    z = rng.standard_normal((args.cpd_iters, 4))
    u = 1.0 - rng.random((args.cpd_iters, 4))
    init = np.array([0.0, 0.0, sd, n_series // 2])
    steps = np.array([0.1 * sd, 0.1 * sd, 0.1 * sd, n_series / 10.0])
    burn = args.cpd_iters // 5
    cpd_args = (x, z, u, init, steps, burn, 50, 0.4, 0.0, 2.0 * sd, sd)

    cases = [
        ("markov_walk", jit_always(_kernels.markov_walk_py), _kernels.markov_walk_py, (cum, walk_u, 0)),
        (
            "window_edge_counts",
            jit_always(_kernels.window_edge_counts_loop),
            _kernels.window_edge_counts_numpy,
            (codes, starts, args.window, args.pids),
        ),
        ("pair_moments", jit_always(_kernels.pair_moments_loop), _kernels.pair_moments_numpy, (ec, cnt, off)),
        ("cpd_chain", _kernels._cpd_chain_jit, _kernels.cpd_chain_py, cpd_args),
    ]

    print(f"frames={args.frames} window={args.window} pids={args.pids} cpd_iters={args.cpd_iters} repeat={args.repeat}")
    print(f"{'kernel':<20} {'numba_s':>10} {'fallback_s':>11} {'speedup':>8}  equal")
    for name, fast, slow, call_args in cases:
        if fast is None:
            print(f"{name:<20} {'n/a':>10}  (numba disabled or missing)")
            continue
        r_fast = fast(*call_args)  # compile outside the timed region
        r_slow = slow(*call_args)
        t_fast = _best(lambda: fast(*call_args), args.repeat)
        t_slow = _best(lambda: slow(*call_args), 1 if name == "cpd_chain" else args.repeat)
        print(f"{name:<20} {t_fast:10.5f} {t_slow:11.5f} {t_slow / t_fast:8.1f}  {_same(r_fast, r_slow)}")


if __name__ == "__main__":
    main()
