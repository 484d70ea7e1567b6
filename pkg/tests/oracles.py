"""Independent reference computations used as test oracles.

Nothing here calls into the code paths under test beyond reading model arrays.
"""
import itertools

import numpy as np


def bayes_update_loops(T, O, b, a, o):
    S = len(b)
    out = [0.0] * S
    for s2 in range(S):
        pred = 0.0
        for s in range(S):
            pred += T[a][s][s2] * b[s]
        out[s2] = O[a][s2][o] * pred
    z = sum(out)
    return [x / z for x in out]


def projection(T, O, alpha, a, o):
    """g_{a,o}(s) = sum_{s'} p(o|s',a) p(s'|s,a) alpha(s') by explicit loops."""
    S = len(alpha)
    return np.array([
        sum(O[a][s2][o] * T[a][s][s2] * alpha[s2] for s2 in range(S))
        for s in range(S)
    ])


def brute_force_backup(T, O, R, gamma, alphas, b):
    """Maximize b·q over every action and every observation -> alpha assignment."""
    A, S, _ = T.shape
    nobs = O.shape[2]
    best_val, best_vec, best_a = -np.inf, None, None
    g = {(a, o, i): projection(T, O, alpha, a, o)
         for a in range(A) for o in range(nobs) for i, alpha in enumerate(alphas)}
    for a in range(A):
        r = np.array([sum(T[a, s, s2] * R[a, s, s2] for s2 in range(S)) for s in range(S)])
        for assignment in itertools.product(range(len(alphas)), repeat=nobs):
            q = r + gamma * sum(g[(a, o, i)] for o, i in enumerate(assignment))
            val = float(np.dot(b, q))
            if val > best_val:
                best_val, best_vec, best_a = val, q, a
    return best_vec, best_a, best_val


def plain_filter(beliefs, threshold):
    kept = []
    for i, b in enumerate(beliefs):
        if all(max(abs(x - y) for x, y in zip(beliefs[k], b)) >= threshold for k in kept):
            kept.append(i)
    return kept


def random_model(rng, S, A, nobs, gamma=0.9):
    T = rng.dirichlet(np.ones(S), size=(A, S))
    O = rng.dirichlet(np.ones(nobs), size=(A, S))
    R = rng.uniform(-5, 5, size=(A, S, S))
    return T, O, R, gamma


def random_belief(rng, S):
    return rng.dirichlet(np.ones(S))


# -- exact finite-horizon value iteration for two-state models --------------

def _upper_envelope(vectors):
    """Alpha vectors (2-D) that are maximal somewhere on the belief segment.

    A vector (v0, v1) is the line y = v1 + p (v0 - v1) over p = b(state 0) in [0, 1].
    Lines are kept conservatively: near-ties are not pruned.
    """
    if len(vectors) <= 1:
        return vectors
    lines = sorted(((v[0] - v[1], v[1], v) for v in vectors), key=lambda t: (t[0], t[1]))
    dedup = []
    for m, c, v in lines:
        if dedup and abs(dedup[-1][0] - m) < 1e-15:
            dedup[-1] = (m, c, v)  # same slope: larger intercept sorts last
        else:
            dedup.append((m, c, v))

    def cross(l1, l2):
        return (l1[1] - l2[1]) / (l2[0] - l1[0])

    hull = []
    for line in dedup:
        while len(hull) >= 2 and cross(hull[-2], line) <= cross(hull[-2], hull[-1]) + 1e-15:
            hull.pop()
        hull.append(line)
    kept = []
    for i, line in enumerate(hull):
        lo = -np.inf if i == 0 else cross(hull[i - 1], line)
        hi = np.inf if i == len(hull) - 1 else cross(line, hull[i + 1])
        if lo < 1 + 1e-9 and hi > -1e-9:
            kept.append(line[2])
    return kept


def exact_two_state_value(T, O, R, gamma, horizon):
    """Optimal finite-horizon alpha vectors of a two-state POMDP (incremental pruning)."""
    A, S, _ = T.shape
    assert S == 2
    nobs = O.shape[2]
    r = np.einsum("aij,aij->ai", T, R)
    V = [np.zeros(2)]
    for _ in range(horizon):
        candidates = []
        for a in range(A):
            proj = [[(T[a] * O[a][:, o][None, :]) @ alpha for alpha in V] for o in range(nobs)]
            acc = _upper_envelope(proj[0])
            for o in range(1, nobs):
                acc = _upper_envelope([x + y for x in acc for y in _upper_envelope(proj[o])])
            candidates.extend(r[a] + gamma * x for x in acc)
        V = _upper_envelope(candidates)
    return V
