"""Brute-force reference for the optimal announcement of small groups.

Everything here is computed from first principles: candidate announcements
are enumerated on a grid and scored by direct evaluation of the adversary's
confidence.  Nothing is borrowed from the closed-form solver, so the two can
check each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dataset import QidGroup
from .errors import TooLarge
from .fidelity import FidelityBounds

MAX_MEMBERS = 4
CHECK_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    step: float = 0.005
    max_members: int = MAX_MEMBERS

    def __post_init__(self):
        if not (0.0 < self.step <= 0.5):
            raise ValueError(f"grid step must be in (0, 0.5], got {self.step}")


@dataclass
class GridResult:
    beta_grid: float
    witness: np.ndarray
    gap_bound: float
    n_candidates: int


def feasibility_check(g: QidGroup, bounds: FidelityBounds, candidate, beta: float,
                      tol: float = CHECK_TOL) -> bool:
    """True when ``candidate`` (group-local) respects the bounds and ``beta``."""
    x = np.asarray(candidate, dtype=float)
    if x.shape != (g.size,):
        return False
    lo = g.take(bounds.lo)
    hi = g.take(bounds.hi)
    if (x < lo - tol).any() or (x > hi + tol).any():
        return False
    for joint in (g.p * x, g.p * (1.0 - x)):
        total = joint.sum()
        if total > 0.0 and (joint / total).max() > beta + tol:
            return False
    return True


def _axes(g: QidGroup, bounds: FidelityBounds, spec: GridSpec):
    p = g.p
    lo = g.take(bounds.lo)
    hi = g.take(bounds.hi)
    # the best single-member masses at the interval ends; optimal points tend to sit on them
    top1 = np.max(p * lo)
    top0 = np.max(p * (1.0 - hi))
    base = np.arange(0.0, 1.0 + spec.step / 2, spec.step)
    axes = []
    for k in range(g.size):
        pts = base[(base >= lo[k]) & (base <= hi[k])]
        extra = [lo[k], hi[k], g.d[k], top1 / p[k], 1.0 - top0 / p[k]]
        extra = [v for v in extra if lo[k] <= v <= hi[k]]
        axes.append(np.unique(np.concatenate([pts, extra])))
    return axes


def _flatten(axes):
    lens = np.array([a.size for a in axes], dtype=np.int64)
    return np.concatenate(axes), lens


def grid_oracle(g: QidGroup, bounds: FidelityBounds, spec: GridSpec | None = None) -> GridResult:
    """Exhaustive minimum of the max confidence over the grid."""
    spec = spec or GridSpec()
    if g.size > spec.max_members:
        raise TooLarge(f"grid oracle handles at most {spec.max_members} members, got {g.size}")
    axes = _axes(g, bounds, spec)
    flat, lens = _flatten(axes)
    best, idx = kernels.grid_search(flat, lens, g.p)
    witness = np.array([axes[k][idx[k]] for k in range(g.size)])
    # moving one coordinate by half a step moves one joint mass by at most p_k*step/2
    gap = float(g.p.max() * spec.step / g.p.sum())
    return GridResult(float(best), witness, gap, int(np.prod(lens)))


def bisection_oracle(g: QidGroup, bounds: FidelityBounds, tol: float = 1e-3,
                     spec: GridSpec | None = None) -> float:
    """Smallest beta for which some grid announcement is feasible, to ``tol``."""
    spec = spec or GridSpec()
    if g.size > spec.max_members:
        raise TooLarge(f"grid oracle handles at most {spec.max_members} members, got {g.size}")
    flat, lens = _flatten(_axes(g, bounds, spec))
    lo = float(g.p.max() / g.p.sum())
    hi = float(kernels.max_confidence(g.p, g.d))
    if kernels.grid_feasible(flat, lens, g.p, lo, CHECK_TOL):
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if kernels.grid_feasible(flat, lens, g.p, mid, CHECK_TOL):
            hi = mid
        else:
            lo = mid
    return hi
