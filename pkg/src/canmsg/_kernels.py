"""Hot inner loops.

Every kernel is written once in numba-compatible Python and compiled by
:func:`canmsg._accel.njit` unless ``CANMSG_DISABLE_NUMBA`` is set. The
``*_py`` names always refer to the uncompiled functions; where a vectorized
numpy formulation exists it is used as the fallback instead of the loop.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import NUMBA_ENABLED, njit


# --------------------------------------------------------------------------
# Markov chain walk


def markov_walk_py(cum, u, start):
    n = u.shape[0]
    k = cum.shape[0]
    out = np.empty(n, dtype=np.int64)
    if n == 0:
        return out
    state = start
    out[0] = state
    for i in range(1, n):
        row = cum[state]
        x = u[i]
        lo = 0
        hi = k - 1
        # first column whose cumulative mass exceeds x
        while lo < hi:
            mid = (lo + hi) // 2
            if row[mid] > x:
                hi = mid
            else:
                lo = mid + 1
        state = lo
        out[i] = state
    return out


markov_walk = njit(markov_walk_py)


# --------------------------------------------------------------------------
# Per-window transition counts (sparse, sorted by edge code)


_DENSE_LIMIT = 1 << 22  # scratch cells for the dense path (32 MiB of int64)


def window_edge_counts_loop(codes, starts, window, n_nodes):
    n_win = starts.shape[0]
    m = window - 1
    edge_codes = np.empty(n_win * m, dtype=np.int64)
    counts = np.empty(n_win * m, dtype=np.int64)
    offsets = np.zeros(n_win + 1, dtype=np.int64)
    buf = np.empty(m, dtype=np.int64)
    dense = n_nodes * n_nodes <= _DENSE_LIMIT
    scratch = np.zeros(n_nodes * n_nodes if dense else 1, dtype=np.int64)
    pos = 0
    for w in range(n_win):
        s = starts[w]
        if dense:
            # tally into the scratch table, sort only the distinct keys
            k = 0
            for j in range(m):
                key = codes[s + j] * n_nodes + codes[s + j + 1]
                if scratch[key] == 0:
                    buf[k] = key
                    k += 1
                scratch[key] += 1
            keys = np.sort(buf[:k])
            for j in range(k):
                edge_codes[pos] = keys[j]
                counts[pos] = scratch[keys[j]]
                scratch[keys[j]] = 0
                pos += 1
            offsets[w + 1] = pos
            continue
        for j in range(m):
            buf[j] = codes[s + j] * n_nodes + codes[s + j + 1]
        buf.sort()
        prev = buf[0]
        run = 1
        for j in range(1, m):
            if buf[j] == prev:
                run += 1
            else:
                edge_codes[pos] = prev
                counts[pos] = run
                pos += 1
                prev = buf[j]
                run = 1
        edge_codes[pos] = prev
        counts[pos] = run
        pos += 1
        offsets[w + 1] = pos
    return edge_codes[:pos].copy(), counts[:pos].copy(), offsets


def window_edge_counts_numpy(codes, starts, window, n_nodes):
    n_win = starts.shape[0]
    m = window - 1
    if n_win == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64), np.zeros(1, np.int64)
    idx = starts[:, None] + np.arange(m)[None, :]
    pair = np.sort(codes[idx] * n_nodes + codes[idx + 1], axis=1)
    new_run = np.ones_like(pair, dtype=bool)
    new_run[:, 1:] = pair[:, 1:] != pair[:, :-1]
    flat_new = new_run.ravel()
    run_starts = np.flatnonzero(flat_new)
    edge_codes = pair.ravel()[run_starts]
    bounds = np.append(run_starts, pair.size)
    counts = np.diff(bounds)
    per_window = new_run.sum(axis=1)
    offsets = np.zeros(n_win + 1, dtype=np.int64)
    np.cumsum(per_window, out=offsets[1:])
    return edge_codes.astype(np.int64), counts.astype(np.int64), offsets


_window_edge_counts_jit = njit(window_edge_counts_loop)


def window_edge_counts(codes, starts, window, n_nodes):
    """Sorted (edge_code, count) runs per window, concatenated with offsets."""
    codes = np.ascontiguousarray(codes, dtype=np.int64)
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    if NUMBA_ENABLED:
        if starts.shape[0] == 0:
            return np.empty(0, np.int64), np.empty(0, np.int64), np.zeros(1, np.int64)
        return _window_edge_counts_jit(codes, starts, int(window), int(n_nodes))
    return window_edge_counts_numpy(codes, starts, window, n_nodes)


# --------------------------------------------------------------------------
# Moments of consecutive sparse count vectors over their key union


def pair_moments_loop(edge_codes, counts, offsets):
    """Integer moments (n, sx, sy, sxx, syy, sxy) for windows (i, i+1)."""
    n_pairs = offsets.shape[0] - 2
    if n_pairs < 0:
        n_pairs = 0
    out = np.zeros((n_pairs, 6), dtype=np.int64)
    for p in range(n_pairs):
        a = offsets[p]
        a_end = offsets[p + 1]
        b = offsets[p + 1]
        b_end = offsets[p + 2]
        n = 0
        sx = 0
        sy = 0
        sxx = 0
        syy = 0
        sxy = 0
        while a < a_end or b < b_end:
            if b >= b_end or (a < a_end and edge_codes[a] < edge_codes[b]):
                x = counts[a]
                sx += x
                sxx += x * x
                a += 1
            elif a >= a_end or edge_codes[b] < edge_codes[a]:
                y = counts[b]
                sy += y
                syy += y * y
                b += 1
            else:
                x = counts[a]
                y = counts[b]
                sx += x
                sy += y
                sxx += x * x
                syy += y * y
                sxy += x * y
                a += 1
                b += 1
            n += 1
        out[p, 0] = n
        out[p, 1] = sx
        out[p, 2] = sy
        out[p, 3] = sxx
        out[p, 4] = syy
        out[p, 5] = sxy
    return out


def pair_moments_numpy(edge_codes, counts, offsets):
    n_win = offsets.shape[0] - 1
    n_pairs = max(n_win - 1, 0)
    out = np.zeros((n_pairs, 6), dtype=np.int64)
    if n_pairs == 0:
        return out
    seg = np.repeat(np.arange(n_win), np.diff(offsets))
    s1 = np.bincount(seg, weights=counts, minlength=n_win).astype(np.int64)
    s2 = np.bincount(seg, weights=counts * counts, minlength=n_win).astype(np.int64)
    sizes = np.diff(offsets)
    for p in range(n_pairs):
        ka = edge_codes[offsets[p] : offsets[p + 1]]
        kb = edge_codes[offsets[p + 1] : offsets[p + 2]]
        _, ia, ib = np.intersect1d(ka, kb, assume_unique=True, return_indices=True)
        ca = counts[offsets[p] : offsets[p + 1]]
        cb = counts[offsets[p + 1] : offsets[p + 2]]
        out[p, 0] = sizes[p] + sizes[p + 1] - ia.shape[0]
        out[p, 5] = int(np.dot(ca[ia], cb[ib]))
    out[:, 1] = s1[:-1]
    out[:, 2] = s1[1:]
    out[:, 3] = s2[:-1]
    out[:, 4] = s2[1:]
    return out


_pair_moments_jit = njit(pair_moments_loop)


def pair_moments(edge_codes, counts, offsets):
    edge_codes = np.ascontiguousarray(edge_codes, dtype=np.int64)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    if NUMBA_ENABLED:
        return _pair_moments_jit(edge_codes, counts, offsets)
    return pair_moments_numpy(edge_codes, counts, offsets)


# --------------------------------------------------------------------------
# Metropolis-within-Gibbs chain for the single change-point switch model


def _log_post(tau, mu1, mu2, sigma, n, s1, s2, prior_mean, prior_sd_mu, prior_sd_sigma):
    if sigma <= 0.0:
        return -np.inf
    n1 = tau
    n2 = n - tau
    a1 = s1[tau]
    q1 = s2[tau]
    a2 = s1[n] - a1
    q2 = s2[n] - q1
    sse = (q1 - 2.0 * mu1 * a1 + n1 * mu1 * mu1) + (q2 - 2.0 * mu2 * a2 + n2 * mu2 * mu2)
    if sse < 0.0:
        sse = 0.0
    ll = -n * math.log(sigma) - sse / (2.0 * sigma * sigma)
    d1 = (mu1 - prior_mean) / prior_sd_mu
    d2 = (mu2 - prior_mean) / prior_sd_mu
    ds = sigma / prior_sd_sigma
    return ll - 0.5 * (d1 * d1 + d2 * d2 + ds * ds)


_log_post_jit = njit(_log_post)


def _make_chain(log_post):
    def chain(x, z, u, init, steps, n_burn, adapt_every, target, prior_mean, prior_sd_mu, prior_sd_sigma):
        """Run the sampler over pre-drawn normals ``z`` and uniforms ``u``.

        Both have shape (n_iter, 4); column order is mu_before, mu_after,
        sigma, tau. Returns traces of the post-burn-in draws, the final step
        sizes and per-proposal acceptance counts after burn-in.
        """
        n = x.shape[0]
        n_iter = z.shape[0]
        s1 = np.zeros(n + 1)
        s2 = np.zeros(n + 1)
        for i in range(n):
            s1[i + 1] = s1[i] + x[i]
            s2[i + 1] = s2[i] + x[i] * x[i]

        mu1 = init[0]
        mu2 = init[1]
        sigma = init[2]
        tau = int(init[3])
        st = steps.copy()
        lp = log_post(tau, mu1, mu2, sigma, n, s1, s2, prior_mean, prior_sd_mu, prior_sd_sigma)

        n_keep = n_iter - n_burn
        tr_tau = np.empty(n_keep, dtype=np.int64)
        tr_mu1 = np.empty(n_keep)
        tr_mu2 = np.empty(n_keep)
        tr_sig = np.empty(n_keep)
        acc_window = np.zeros(4, dtype=np.int64)
        acc_kept = np.zeros(4, dtype=np.int64)

        for it in range(n_iter):
            # mu_before
            cand = mu1 + st[0] * z[it, 0]
            lp_c = log_post(tau, cand, mu2, sigma, n, s1, s2, prior_mean, prior_sd_mu, prior_sd_sigma)
            if math.log(u[it, 0]) < lp_c - lp:
                mu1 = cand
                lp = lp_c
                acc_window[0] += 1
                if it >= n_burn:
                    acc_kept[0] += 1
            # mu_after
            cand = mu2 + st[1] * z[it, 1]
            lp_c = log_post(tau, mu1, cand, sigma, n, s1, s2, prior_mean, prior_sd_mu, prior_sd_sigma)
            if math.log(u[it, 1]) < lp_c - lp:
                mu2 = cand
                lp = lp_c
                acc_window[1] += 1
                if it >= n_burn:
                    acc_kept[1] += 1
            # sigma
            cand = sigma + st[2] * z[it, 2]
            if cand > 0.0:
                lp_c = log_post(tau, mu1, mu2, cand, n, s1, s2, prior_mean, prior_sd_mu, prior_sd_sigma)
                if math.log(u[it, 2]) < lp_c - lp:
                    sigma = cand
                    lp = lp_c
                    acc_window[2] += 1
                    if it >= n_burn:
                        acc_kept[2] += 1
            # tau: integer random walk, never a zero move
            step = int(math.floor(z[it, 3] * st[3] + 0.5))
            if step == 0:
                step = 1 if z[it, 3] >= 0.0 else -1
            cand_tau = tau + step
            if 0 <= cand_tau < n:
                lp_c = log_post(cand_tau, mu1, mu2, sigma, n, s1, s2, prior_mean, prior_sd_mu, prior_sd_sigma)
                if math.log(u[it, 3]) < lp_c - lp:
                    tau = cand_tau
                    lp = lp_c
                    acc_window[3] += 1
                    if it >= n_burn:
                        acc_kept[3] += 1

            if it < n_burn and (it + 1) % adapt_every == 0:
                for k in range(4):
                    rate = acc_window[k] / adapt_every
                    st[k] *= math.exp(2.0 * (rate - target))
                    acc_window[k] = 0
                if st[3] < 0.5:
                    st[3] = 0.5
                if st[3] > n:
                    st[3] = float(n)
            if it >= n_burn:
                j = it - n_burn
                tr_tau[j] = tau
                tr_mu1[j] = mu1
                tr_mu2[j] = mu2
                tr_sig[j] = sigma
        return tr_tau, tr_mu1, tr_mu2, tr_sig, st, acc_kept

    return chain


cpd_chain_py = _make_chain(_log_post)
# closures cannot be cached on disk
_cpd_chain_jit = njit(_make_chain(_log_post_jit), cache=False) if NUMBA_ENABLED else None


def cpd_chain(x, z, u, init, steps, n_burn, adapt_every, target, prior_mean, prior_sd_mu, prior_sd_sigma):
    args = (
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(z, dtype=np.float64),
        np.ascontiguousarray(u, dtype=np.float64),
        np.asarray(init, dtype=np.float64),
        np.asarray(steps, dtype=np.float64),
        int(n_burn),
        int(adapt_every),
        float(target),
        float(prior_mean),
        float(prior_sd_mu),
        float(prior_sd_sigma),
    )
    if NUMBA_ENABLED:
        return _cpd_chain_jit(*args)
    return cpd_chain_py(*args)
