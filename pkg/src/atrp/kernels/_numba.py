"""Compiled loop kernels. Each mirrors a function in ``_numpy``."""

import math

import numpy as np

from .._accel import njit

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def anchor(p, bound_lo):
    best = -1.0
    idx = 0
    for k in range(p.shape[0]):
        v = p[k] * bound_lo[k]
        if v > best:
            best = v
            idx = k
    return idx, best


@njit(**_opts)
def capped_masses(p, bound_hi, cap):
    out = np.empty(p.shape[0])
    for k in range(p.shape[0]):
        v = p[k] * bound_hi[k]
        out[k] = v if v < cap else cap
    return out


@njit(**_opts)
def capped_sum(p, bound_hi, cap, skip):
    s = 0.0
    for k in range(p.shape[0]):
        if k == skip:
            continue
        v = p[k] * bound_hi[k]
        s += v if v < cap else cap
    return s


@njit(**_opts)
def greedy_fill(lo_mass, hi_mass, target):
    out = lo_mass.copy()
    resid = target
    for k in range(lo_mass.shape[0]):
        resid -= lo_mass[k]
    for k in range(lo_mass.shape[0]):
        if resid <= 0.0:
            break
        cap = hi_mass[k] - lo_mass[k]
        if cap <= 0.0:
            continue
        take = resid if resid < cap else cap
        out[k] += take
        resid -= take
    return out, resid


@njit(**_opts)
def max_confidence(p, x):
    s1 = 0.0
    s0 = 0.0
    m1 = 0.0
    m0 = 0.0
    for k in range(p.shape[0]):
        j1 = p[k] * x[k]
        j0 = p[k] * (1.0 - x[k])
        s1 += j1
        s0 += j0
        if j1 > m1:
            m1 = j1
        if j0 > m0:
            m0 = j0
    c = 0.0
    if s1 > 0.0:
        c = m1 / s1
    if s0 > 0.0 and m0 / s0 > c:
        c = m0 / s0
    return c


@njit(**_opts)
def floor_score(p, lo, hi, ks, t):
    ps = p[ks]
    up = 0.0
    dn = 0.0
    for k in range(p.shape[0]):
        if k == ks:
            continue
        u = ps * t
        h = p[k] * hi[k]
        if h < u:
            u = h
        l = p[k] - ps * (1.0 - t)
        g = p[k] * lo[k]
        if g > l:
            l = g
        up += u - p[k] * t
        dn += p[k] * t - l
    return up if up < dn else dn


@njit(**_opts)
def grid_search(flat, lens, p):
    m = lens.shape[0]
    offs = np.zeros(m, dtype=np.int64)
    total = 1
    for k in range(m):
        if k > 0:
            offs[k] = offs[k - 1] + lens[k - 1]
        total *= lens[k]
    idx = np.zeros(m, dtype=np.int64)
    best = np.inf
    best_idx = idx.copy()
    for _ in range(total):
        s1 = 0.0
        s0 = 0.0
        m1 = 0.0
        m0 = 0.0
        for k in range(m):
            x = flat[offs[k] + idx[k]]
            j1 = p[k] * x
            j0 = p[k] * (1.0 - x)
            s1 += j1
            s0 += j0
            if j1 > m1:
                m1 = j1
            if j0 > m0:
                m0 = j0
        c = 0.0
        if s1 > 0.0:
            c = m1 / s1
        if s0 > 0.0 and m0 / s0 > c:
            c = m0 / s0
        if c < best:
            best = c
            best_idx[:] = idx
        # mixed-radix increment, last axis fastest (C order)
        k = m - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < lens[k]:
                break
            idx[k] = 0
            k -= 1
    return best, best_idx


@njit(**_opts)
def grid_feasible(flat, lens, p, beta, tol):
    m = lens.shape[0]
    offs = np.zeros(m, dtype=np.int64)
    total = 1
    for k in range(m):
        if k > 0:
            offs[k] = offs[k - 1] + lens[k - 1]
        total *= lens[k]
    idx = np.zeros(m, dtype=np.int64)
    lim = beta + tol
    for _ in range(total):
        s1 = 0.0
        s0 = 0.0
        for k in range(m):
            x = flat[offs[k] + idx[k]]
            s1 += p[k] * x
            s0 += p[k] * (1.0 - x)
        ok = True
        for k in range(m):
            x = flat[offs[k] + idx[k]]
            if s1 > 0.0 and p[k] * x > lim * s1:
                ok = False
                break
            if s0 > 0.0 and p[k] * (1.0 - x) > lim * s0:
                ok = False
                break
        if ok:
            return True
        k = m - 1
        while k >= 0:
            idx[k] += 1
            if idx[k] < lens[k]:
                break
            idx[k] = 0
            k -= 1
    return False


@njit(**_opts)
def _outcome_distance(a, b, family):
    if family == 0:
        return abs(a - b)
    worst = 0.0
    for za, zb in ((a, b), (1.0 - a, 1.0 - b)):
        if za == 0.0 and zb == 0.0:
            continue
        if za == 0.0 or zb == 0.0:
            return np.inf
        v = abs(math.log(za / zb))
        if v > worst:
            worst = v
    return worst


@njit(**_opts)
def pairwise_violation(d, codes, eps, family):
    n = d.shape[0]
    k_attr = codes.shape[1]
    best = -np.inf
    bi = -1
    bj = -1
    for i in range(n):
        for j in range(i + 1, n):
            mism = 0
            for a in range(k_attr):
                if codes[i, a] != codes[j, a]:
                    mism += 1
            v = _outcome_distance(d[i], d[j], family) - mism / k_attr - eps
            if v > best:
                best = v
                bi = i
                bj = j
    return best, bi, bj
