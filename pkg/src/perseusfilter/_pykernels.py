"""Pure-Python/numpy versions of the compiled kernels in ``_ckernels.pyx``.

Both modules expose the same functions with the same semantics; ``kernels``
picks one at import time.
"""
from __future__ import annotations

import bisect

import numpy as np

# Widens the first-coordinate window so rounding in x +/- threshold never drops
# a true candidate; extra candidates are resolved by the full distance check.
WINDOW_SLACK = 1e-12


def greedy_filter(beliefs, threshold):
    """Keep belief i iff its L-inf distance to every previously kept belief is >= threshold."""
    beliefs = np.ascontiguousarray(beliefs, dtype=np.float64)
    n = beliefs.shape[0]
    kept = np.empty(n, dtype=np.int64)
    buf = np.empty_like(beliefs)
    k = 0
    for i in range(n):
        b = beliefs[i]
        if k and (np.abs(buf[:k] - b).max(axis=1) < threshold).any():
            continue
        buf[k] = b
        kept[k] = i
        k += 1
    return kept[:k].copy()


def greedy_filter_sorted(beliefs, threshold):
    """Same result as :func:`greedy_filter`, skipping kept beliefs whose first
    coordinate already differs from the candidate's by at least ``threshold``."""
    beliefs = np.ascontiguousarray(beliefs, dtype=np.float64)
    n = beliefs.shape[0]
    if beliefs.ndim != 2 or beliefs.shape[1] == 0:
        return greedy_filter(beliefs, threshold)
    keys: list[float] = []
    rows: list[int] = []
    kept = []
    for i in range(n):
        b = beliefs[i]
        x = b[0]
        lo = bisect.bisect_right(keys, x - threshold - WINDOW_SLACK)
        hi = bisect.bisect_left(keys, x + threshold + WINDOW_SLACK)
        if hi > lo:
            cand = beliefs[rows[lo:hi]]
            if (np.abs(cand - b).max(axis=1) < threshold).any():
                continue
        pos = bisect.bisect_right(keys, x)
        keys.insert(pos, x)
        rows.insert(pos, i)
        kept.append(i)
    return np.array(kept, dtype=np.int64)


def _draw(cdf, u):
    j = int(np.searchsorted(cdf, u, side="right"))
    if j >= cdf.shape[0]:
        j = int(np.flatnonzero(np.diff(cdf, prepend=0.0) > 0.0)[-1])
    return j


def simulate_episode(T_cdf, O_cdf, transition, observation, reward, alphas, actions,
                     b0, s0, terminal, discount, max_steps, uniforms):
    """Run one greedy-policy episode; returns (discounted reward, steps, truncated).

    ``uniforms[t]`` holds the two U[0,1) draws used at step t (next state,
    observation), so the trajectory is fixed by the caller's random stream.
    """
    b = b0.copy()
    s = int(s0)
    total = 0.0
    weight = 1.0
    for step in range(max_steps):
        a = int(actions[int(np.argmax(alphas @ b))])
        s2 = _draw(T_cdf[a, s], uniforms[step, 0])
        o = _draw(O_cdf[a, s2], uniforms[step, 1])
        total += reward[a, s, s2] * weight
        weight *= discount
        nb = (b @ transition[a]) * observation[a, :, o]
        z = nb.sum()
        b = nb / z if z > 0.0 else b0.copy()
        s = s2
        if terminal[s]:
            return total, step + 1, False
    return total, max_steps, True
