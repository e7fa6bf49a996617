"""Compiled dynamic programs for penalized change-point detection.

Both kernels minimize  sum of segment SSE costs + beta * (#change points)
via the recursion  F(t) = min_s [ F(s) + C(s+1, t) ] + beta  with
F(0) = -beta. Segment costs come from prefix sums of the values and
their squares, so one cost query is O(1). ``pelt_core`` prunes the
candidate set (admissible for SSE, where the cost constant K is 0) and
stays exact; ``optpart_core`` keeps every candidate and is the O(n^2)
reference.
"""

import numpy as np
from numba import njit

_NO_MASK = np.zeros((0, 0), dtype=np.bool_)


@njit(cache=True)
def pelt_core(values, beta, cand_mask):  # pragma: no cover - compiled
    n = values.shape[0]
    s1 = np.empty(n + 1)
    s2 = np.empty(n + 1)
    s1[0] = 0.0
    s2[0] = 0.0
    for i in range(n):
        s1[i + 1] = s1[i] + values[i]
        s2[i + 1] = s2[i] + values[i] * values[i]

    F = np.empty(n + 1)
    F[0] = -beta
    prev = np.zeros(n + 1, dtype=np.int64)
    cand = np.empty(n + 1, dtype=np.int64)
    cand[0] = 0
    ncand = 1
    costs = np.empty(n + 1)
    record = cand_mask.shape[0] > 0

    for t in range(1, n + 1):
        if record:
            for j in range(ncand):
                cand_mask[t, cand[j]] = True
        best = np.inf
        best_s = 0
        for j in range(ncand):
            s = cand[j]
            d1 = s1[t] - s1[s]
            c = F[s] + (s2[t] - s2[s]) - d1 * d1 / (t - s)
            costs[j] = c
            if c < best:
                best = c
                best_s = s
        F[t] = best + beta
        prev[t] = best_s
        # prune candidates that can never become optimal again (K = 0)
        k = 0
        for j in range(ncand):
            if costs[j] <= F[t]:
                cand[k] = cand[j]
                k += 1
        cand[k] = t
        ncand = k + 1

    m = 0
    t = n
    while t > 0:
        if prev[t] > 0:
            m += 1
        t = prev[t]
    cps = np.empty(m, dtype=np.int64)
    t = n
    i = m - 1
    while t > 0:
        s = prev[t]
        if s > 0:
            cps[i] = s - 1
            i -= 1
        t = s
    return cps, F[n]


@njit(cache=True)
def optpart_core(values, beta):  # pragma: no cover - compiled
    n = values.shape[0]
    s1 = np.empty(n + 1)
    s2 = np.empty(n + 1)
    s1[0] = 0.0
    s2[0] = 0.0
    for i in range(n):
        s1[i + 1] = s1[i] + values[i]
        s2[i + 1] = s2[i] + values[i] * values[i]

    F = np.empty(n + 1)
    F[0] = -beta
    prev = np.zeros(n + 1, dtype=np.int64)

    for t in range(1, n + 1):
        best = np.inf
        best_s = 0
        for s in range(t):
            d1 = s1[t] - s1[s]
            c = F[s] + (s2[t] - s2[s]) - d1 * d1 / (t - s)
            if c < best:
                best = c
                best_s = s
        F[t] = best + beta
        prev[t] = best_s

    m = 0
    t = n
    while t > 0:
        if prev[t] > 0:
            m += 1
        t = prev[t]
    cps = np.empty(m, dtype=np.int64)
    t = n
    i = m - 1
    while t > 0:
        s = prev[t]
        if s > 0:
            cps[i] = s - 1
            i -= 1
        t = s
    return cps, F[n], prev
