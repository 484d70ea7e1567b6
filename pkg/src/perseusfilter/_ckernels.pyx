# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: greedy L-inf belief filtering and greedy-policy episode simulation.

Semantics match ``_pykernels`` exactly; see that module for the reference versions.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.string cimport memmove

cnp.import_array()

cdef double WINDOW_SLACK = 1e-12


cdef inline bint _similar(const double[:, ::1] X, Py_ssize_t i, Py_ssize_t j,
                          Py_ssize_t d, double threshold) nogil:
    cdef Py_ssize_t s
    for s in range(d):
        if fabs(X[i, s] - X[j, s]) >= threshold:
            return False
    return True


def greedy_filter(beliefs, double threshold):
    cdef const double[:, ::1] X = np.ascontiguousarray(beliefs, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    kept_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] kept = kept_arr
    cdef Py_ssize_t i, j, k = 0
    cdef bint dup
    with nogil:
        for i in range(n):
            dup = False
            for j in range(k):
                if _similar(X, kept[j], i, d, threshold):
                    dup = True
                    break
            if not dup:
                kept[k] = i
                k += 1
    return kept_arr[:k].copy()


cdef inline Py_ssize_t _lower(const double[::1] keys, Py_ssize_t k, double x) nogil:
    # first index with keys[idx] > x
    cdef Py_ssize_t lo = 0, hi = k, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _upper(const double[::1] keys, Py_ssize_t k, double x) nogil:
    # first index with keys[idx] >= x
    cdef Py_ssize_t lo = 0, hi = k, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if keys[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def greedy_filter_sorted(beliefs, double threshold):
    cdef const double[:, ::1] X = np.ascontiguousarray(beliefs, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    if d == 0:
        return greedy_filter(beliefs, threshold)
    keys_arr = np.empty(n, dtype=np.float64)
    rows_arr = np.empty(n, dtype=np.int64)
    kept_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] keys = keys_arr
    cdef cnp.int64_t[::1] rows = rows_arr
    cdef cnp.int64_t[::1] kept = kept_arr
    cdef Py_ssize_t i, j, lo, hi, pos, k = 0, nk = 0
    cdef double x
    cdef bint dup
    with nogil:
        for i in range(n):
            x = X[i, 0]
            lo = _lower(keys, k, x - threshold - WINDOW_SLACK)
            hi = _upper(keys, k, x + threshold + WINDOW_SLACK)
            dup = False
            for j in range(lo, hi):
                if _similar(X, rows[j], i, d, threshold):
                    dup = True
                    break
            if dup:
                continue
            pos = _lower(keys, k, x)
            if pos < k:
                memmove(&keys[pos + 1], &keys[pos], (k - pos) * sizeof(double))
                memmove(&rows[pos + 1], &rows[pos], (k - pos) * sizeof(cnp.int64_t))
            keys[pos] = x
            rows[pos] = i
            k += 1
            kept[nk] = i
            nk += 1
    return kept_arr[:nk].copy()


cdef inline Py_ssize_t _draw(const double[::1] cdf, double u) nogil:
    cdef Py_ssize_t j, n = cdf.shape[0]
    for j in range(n):
        if cdf[j] > u:
            return j
    # u fell past a cdf that rounds below 1: take the last outcome with mass
    j = n - 1
    while j > 0 and cdf[j] == cdf[j - 1]:
        j -= 1
    return j


def simulate_episode(T_cdf, O_cdf, transition, observation, reward, alphas, actions,
                     b0, Py_ssize_t s0, terminal, double discount, Py_ssize_t max_steps,
                     uniforms):
    cdef const double[:, :, ::1] Tc = np.ascontiguousarray(T_cdf, dtype=np.float64)
    cdef const double[:, :, ::1] Oc = np.ascontiguousarray(O_cdf, dtype=np.float64)
    cdef const double[:, :, ::1] T = np.ascontiguousarray(transition, dtype=np.float64)
    cdef const double[:, :, ::1] Obs = np.ascontiguousarray(observation, dtype=np.float64)
    cdef const double[:, :, ::1] R = np.ascontiguousarray(reward, dtype=np.float64)
    cdef const double[:, ::1] V = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef const cnp.int64_t[::1] act = np.ascontiguousarray(actions, dtype=np.int64)
    cdef const double[::1] start = np.ascontiguousarray(b0, dtype=np.float64)
    cdef const cnp.uint8_t[::1] term = np.ascontiguousarray(terminal, dtype=np.uint8)
    cdef const double[:, ::1] U = np.ascontiguousarray(uniforms, dtype=np.float64)

    cdef Py_ssize_t S = T.shape[1], K = V.shape[0]
    b_arr = np.array(start, dtype=np.float64)
    nb_arr = np.empty(S, dtype=np.float64)
    cdef double[::1] b = b_arr
    cdef double[::1] nb = nb_arr
    cdef Py_ssize_t step, i, s2, o, a, best, sp, s = s0
    cdef double total = 0.0, weight = 1.0, val, bestval, z, acc
    cdef Py_ssize_t steps_taken = max_steps
    cdef bint done = False
    with nogil:
        for step in range(max_steps):
            best = 0
            bestval = 0.0
            for i in range(K):
                val = 0.0
                for sp in range(S):
                    val = val + V[i, sp] * b[sp]
                if i == 0 or val > bestval:
                    bestval = val
                    best = i
            a = act[best]
            s2 = _draw(Tc[a, s], U[step, 0])
            o = _draw(Oc[a, s2], U[step, 1])
            total += R[a, s, s2] * weight
            weight *= discount
            z = 0.0
            for sp in range(S):
                acc = 0.0
                for i in range(S):
                    acc = acc + b[i] * T[a, i, sp]
                nb[sp] = acc * Obs[a, sp, o]
                z += nb[sp]
            if z > 0.0:
                for sp in range(S):
                    b[sp] = nb[sp] / z
            else:
                for sp in range(S):
                    b[sp] = start[sp]
            s = s2
            if term[s]:
                steps_taken = step + 1
                done = True
                break
    return total, steps_taken, not done
