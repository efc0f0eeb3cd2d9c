"""Vectorised fallbacks with the same signatures as ``_numba``."""

import numpy as np

_CHUNK = 1 << 20


def anchor(p, bound_lo):
    prod = p * bound_lo
    idx = int(np.argmax(prod))
    return idx, float(prod[idx])


def capped_masses(p, bound_hi, cap):
    return np.minimum(p * bound_hi, cap)


def capped_sum(p, bound_hi, cap, skip):
    masses = np.minimum(p * bound_hi, cap)
    return float(masses.sum() - masses[skip])


def greedy_fill(lo_mass, hi_mass, target):
    resid = target - lo_mass.sum()
    cap = np.maximum(hi_mass - lo_mass, 0.0)
    before = np.concatenate(([0.0], np.cumsum(cap)[:-1]))
    take = np.clip(resid - before, 0.0, cap) if resid > 0 else np.zeros_like(cap)
    return lo_mass + take, float(resid - take.sum())


def _max_conf_rows(p, x):
    j1 = x * p
    j0 = (1.0 - x) * p
    s1 = j1.sum(axis=-1)
    s0 = j0.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        c1 = np.where(s1 > 0, j1.max(axis=-1) / s1, 0.0)
        c0 = np.where(s0 > 0, j0.max(axis=-1) / s0, 0.0)
    return np.maximum(c1, c0)


def max_confidence(p, x):
    return float(_max_conf_rows(p, x))


def floor_score(p, lo, hi, ks, t):
    ps = p[ks]
    u = np.minimum(p * hi, ps * t)
    l = np.maximum(p * lo, p - ps * (1.0 - t))
    up = (u - p * t).sum() - (u[ks] - p[ks] * t)
    dn = (p * t - l).sum() - (p[ks] * t - l[ks])
    return float(min(up, dn))


def _chunks(flat, lens):
    offs = np.concatenate(([0], np.cumsum(lens)[:-1]))
    total = int(np.prod(lens))
    for start in range(0, total, _CHUNK):
        flat_idx = np.arange(start, min(start + _CHUNK, total))
        idx = np.stack(np.unravel_index(flat_idx, tuple(lens)), axis=-1)
        yield start, idx, flat[idx + offs]


def grid_search(flat, lens, p):
    best = np.inf
    best_idx = np.zeros(len(lens), dtype=np.int64)
    for _, idx, x in _chunks(flat, lens):
        conf = _max_conf_rows(p, x)
        i = int(np.argmin(conf))
        if conf[i] < best:
            best = float(conf[i])
            best_idx = idx[i].astype(np.int64)
    return best, best_idx


def grid_feasible(flat, lens, p, beta, tol):
    lim = beta + tol
    for _, _, x in _chunks(flat, lens):
        j1 = x * p
        j0 = (1.0 - x) * p
        s1 = j1.sum(axis=-1, keepdims=True)
        s0 = j0.sum(axis=-1, keepdims=True)
        ok1 = (s1 <= 0) | (j1 <= lim * s1).all(axis=-1, keepdims=True)
        ok0 = (s0 <= 0) | (j0 <= lim * s0).all(axis=-1, keepdims=True)
        if (ok1 & ok0).any():
            return True
    return False


def _outcome_distance(a, b, family):
    if family == 0:
        return np.abs(a - b)
    out = np.zeros(np.broadcast(a, b).shape)
    for za, zb in ((a, b), (1.0 - a, 1.0 - b)):
        za, zb = np.broadcast_arrays(za, zb)
        both = (za == 0) & (zb == 0)
        one = (za == 0) ^ (zb == 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.abs(np.log(za / zb))
        v = np.where(both, 0.0, np.where(one, np.inf, v))
        out = np.maximum(out, v)
    return out


def pairwise_violation(d, codes, eps, family):
    n = d.shape[0]
    k_attr = codes.shape[1]
    best, bi, bj = -np.inf, -1, -1
    for i in range(n - 1):
        rest = slice(i + 1, n)
        dist = (codes[rest] != codes[i]).sum(axis=1) / k_attr
        v = _outcome_distance(d[i], d[rest], family) - dist - eps
        j = int(np.argmax(v))
        if v[j] > best:
            best, bi, bj = float(v[j]), i, i + 1 + j
    return best, bi, bj
