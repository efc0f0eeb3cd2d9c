"""Closed-form optimal privacy for an announced rule under fidelity bounds.

For each QID group the solver returns the smallest achievable maximum
adversary confidence ``beta*`` and an announced rule attaining it.  The
three classical candidates (``Beta0``, ``Beta1``, ``BetaP``) are floored
at the largest member prior, which no announcement can beat; when the
floor binds, a dedicated construction (``BetaMin``) reaches it.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dataset import QidGroup, WeightedDataset, partition_by_qid
from .errors import EmptyBounds, GroupSolveError, InternalInfeasible
from .fidelity import FidelityBounds, FidelitySpec, bounds_for, bounds_from_alpha, bounds_from_delta

log = logging.getLogger(__name__)

BETA0 = "Beta0"
BETA1 = "Beta1"
BETAP = "BetaP"
BETAMIN = "BetaMin"
SINGLETON = "Singleton"

VERIFY_TOL = 1e-9
_TERNARY_ITERS = 200

SOLVER_NOTES = {
    "log_base": "e",
    "zero_numerator": "a candidate whose anchor mass is zero is taken as 0",
    "beta_floor": "beta* = max(Beta0, Beta1, BetaP, largest member prior)",
    "tie_order": "Beta0, then Beta1, then BetaP",
}


@dataclass
class SubproblemWorkspace:
    """Anchors and effective per-member bounds at a given beta.

    ``anchor1`` maximises p*lo (the positive-outcome anchor) and ``anchor0``
    maximises p*(1-hi); ``mass1``/``mass0`` are those maxima.
    """

    beta: float
    anchor1: int
    anchor0: int
    mass1: float
    mass0: float
    b: np.ndarray
    x_max: np.ndarray
    x_min: np.ndarray
    y_max: np.ndarray
    y_min: np.ndarray


@dataclass
class GroupSolution:
    qid: tuple
    case: str
    beta_star: float
    beta0: float | None
    beta1: float | None
    beta_p: float | None
    beta_min: float
    d_tilde: np.ndarray
    achieved_conf: float
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "qid": list(self.qid),
            "case": self.case,
            "beta_star": self.beta_star,
            "beta0": self.beta0,
            "beta1": self.beta1,
            "beta_p": self.beta_p,
            "beta_min": self.beta_min,
            "achieved_conf": self.achieved_conf,
            "d_tilde": [float(v) for v in self.d_tilde],
            "notes": list(self.notes),
        }


def _group_bounds(g: QidGroup, bounds: FidelityBounds):
    lo = g.take(bounds.lo)
    hi = g.take(bounds.hi)
    bad = np.flatnonzero(lo > hi + 1e-12)
    if bad.size:
        raise EmptyBounds(f"group {g.qid}: member {int(bad[0])} has empty fidelity interval")
    return lo, hi


def _anchors(p, lo, hi):
    pi, mass1 = kernels.anchor(p, lo)
    th, mass0 = kernels.anchor(p, 1.0 - hi)
    return int(pi), int(th), float(mass1), float(mass0)


def compute_betas(g: QidGroup, bounds: FidelityBounds):
    """The three candidate values ``(beta0, beta1, beta_p)`` for one group."""
    lo, hi = _group_bounds(g, bounds)
    return _betas(g.p, lo, hi)


def _betas(p, lo, hi):
    pi, th, mass1, mass0 = _anchors(p, lo, hi)
    if mass1 > 0.0:
        rest1 = kernels.capped_sum(p, hi, mass1, pi)
        beta1 = mass1 / (mass1 + rest1)
    else:
        beta1 = 0.0
    if mass0 > 0.0:
        rest0 = kernels.capped_sum(p, 1.0 - lo, mass0, th)
        beta0 = mass0 / (mass0 + rest0)
    else:
        beta0 = 0.0
    beta_p = (mass1 + mass0) / float(p.sum())
    return float(beta0), float(beta1), float(beta_p)


def compute_workspace(g: QidGroup, bounds: FidelityBounds, beta: float) -> SubproblemWorkspace:
    lo, hi = _group_bounds(g, bounds)
    p = g.p
    pi, th, mass1, mass0 = _anchors(p, lo, hi)
    b = p - beta * p.sum()
    return SubproblemWorkspace(
        beta=float(beta),
        anchor1=pi,
        anchor0=th,
        mass1=mass1,
        mass0=mass0,
        b=b,
        x_max=np.minimum(p * hi, mass1) / p,
        x_min=np.maximum(p * lo, mass1 + b) / p,
        y_max=np.minimum(p * (1.0 - lo), mass0) / p,
        y_min=np.maximum(p * (1.0 - hi), mass0 + b) / p,
    )


def _build_beta_p(p, lo, hi, beta_p, pi, th, mass1):
    total = p.sum()
    b = p - beta_p * total
    lo_mass = np.maximum(p * lo, mass1 + b)
    hi_mass = np.minimum(p * hi, mass1)
    keep = np.ones(p.size, dtype=bool)
    keep[[pi, th]] = False
    target = (1.0 - 2.0 * beta_p) / beta_p * mass1 - b[th]
    x = np.empty(p.size)
    if keep.any():
        filled, _ = kernels.greedy_fill(lo_mass[keep], hi_mass[keep], target)
        x[keep] = filled / p[keep]
    x[pi] = lo[pi]
    x[th] = hi[th]
    return x


def _build_floor(p, lo, hi, mass1, mass0):
    """Announcement whose max confidence equals the largest member prior."""
    ks = int(np.argmax(p))
    top = p[ks]
    t_lo = max(mass1 / top, lo[ks])
    t_hi = min(1.0 - mass0 / top, hi[ks])
    if t_lo > t_hi + VERIFY_TOL:
        raise InternalInfeasible(f"floor construction has empty range [{t_lo}, {t_hi}]")
    a, c = t_lo, max(t_lo, t_hi)
    for _ in range(_TERNARY_ITERS):
        m1 = a + (c - a) / 3.0
        m2 = c - (c - a) / 3.0
        if kernels.floor_score(p, lo, hi, ks, m1) < kernels.floor_score(p, lo, hi, ks, m2):
            a = m1
        else:
            c = m2
    total = p.sum()

    def build(t):
        lo_mass = np.maximum(p * lo, p - top * (1.0 - t))
        hi_mass = np.minimum(p * hi, top * t)
        lo_mass[ks] = hi_mass[ks] = top * t
        filled, _ = kernels.greedy_fill(lo_mass, hi_mass, total * t)
        return filled / p

    # an outcome with exactly zero mass is never observed, so the range ends can
    # beat interior points; keep whichever candidate leaks least
    best_x, best_c = None, np.inf
    for t in (0.5 * (a + c), t_lo, t_hi):
        x = np.clip(build(min(max(t, t_lo), max(t_lo, t_hi))), lo, hi)
        conf = kernels.max_confidence(p, x)
        if conf < best_c - 1e-15:
            best_x, best_c = x, conf
    return best_x


def solve_group(g: QidGroup, bounds: FidelityBounds) -> GroupSolution:
    lo, hi = _group_bounds(g, bounds)
    p = g.p
    floor = float(p.max() / p.sum())
    if g.size == 1:
        return GroupSolution(g.qid, SINGLETON, 1.0, None, None, None, 1.0,
                             np.clip(g.d.copy(), lo, hi), 1.0, ["single-member group"])

    pi, th, mass1, mass0 = _anchors(p, lo, hi)
    beta0, beta1, beta_p = _betas(p, lo, hi)
    best = max(beta0, beta1, beta_p)
    notes = []
    if best >= floor:
        beta_star = best
        if best == beta0:
            case = BETA0
            x = 1.0 - kernels.capped_masses(p, 1.0 - lo, mass0) / p
        elif best == beta1:
            case = BETA1
            x = kernels.capped_masses(p, hi, mass1) / p
        else:
            case = BETAP
            x = _build_beta_p(p, lo, hi, beta_p, pi, th, mass1)
    else:
        beta_star = floor
        case = BETAMIN
        notes.append(f"candidates {best:.6g} below largest member prior {floor:.6g}")
        x = _build_floor(p, lo, hi, mass1, mass0)

    x = np.clip(x, lo, hi)
    achieved = float(kernels.max_confidence(p, x))
    if achieved > beta_star + VERIFY_TOL:
        raise InternalInfeasible(
            f"group {g.qid}: case {case} reached confidence {achieved} above beta* {beta_star}"
        )
    return GroupSolution(g.qid, case, float(beta_star), beta0, beta1, beta_p, floor, x, achieved, notes)


@dataclass
class MasterSolution:
    spec: FidelitySpec | None
    groups: list
    solutions: list
    d_tilde: np.ndarray
    notes: dict = field(default_factory=lambda: dict(SOLVER_NOTES))

    @property
    def beta_star(self) -> float:
        return max(s.beta_star for s in self.solutions)

    def to_dict(self) -> dict:
        return {
            "beta_star": self.beta_star,
            "fidelity": self.spec.to_dict() if self.spec else None,
            "d_tilde": [float(v) for v in self.d_tilde],
            "groups": [s.to_dict() for s in self.solutions],
            "notes": dict(self.notes),
        }


def solve_master(ds: WeightedDataset, spec: FidelitySpec, jobs: int | None = None,
                 bounds: FidelityBounds | None = None) -> MasterSolution:
    """Solve every QID group; results come back in first-appearance order."""
    if bounds is None:
        bounds = bounds_for(spec, ds.d)
    groups = partition_by_qid(ds)

    def run(g):
        try:
            return solve_group(g, bounds), None
        except Exception as exc:  # collected and re-raised together below
            return None, exc

    if jobs and jobs > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, groups))
    else:
        results = [run(g) for g in groups]

    failures = {g.qid: exc for g, (_, exc) in zip(groups, results) if exc is not None}
    if failures:
        raise GroupSolveError(failures)
    solutions = [sol for sol, _ in results]
    d_tilde = np.empty(len(ds))
    for g, sol in zip(groups, solutions):
        d_tilde[g.indices] = sol.d_tilde
        log.debug("group %s: %s beta*=%.6g", g.qid, sol.case, sol.beta_star)
    return MasterSolution(spec, groups, solutions, d_tilde)


@dataclass
class TradeoffPoint:
    value: float
    beta_star: float
    case: str


def tradeoff_sweep(g: QidGroup, kind: str = "delta", steps: int = 101) -> list[TradeoffPoint]:
    """beta* as the fidelity parameter runs over an even grid on [0, 1]."""
    if steps < 2:
        raise ValueError("steps must be at least 2")
    local = g.localized()
    make = {"delta": bounds_from_delta, "alpha": bounds_from_alpha}[kind]
    out = []
    for v in np.linspace(0.0, 1.0, steps):
        sol = solve_group(local, make(local.d, float(v)))
        out.append(TradeoffPoint(float(v), sol.beta_star, sol.case))
    return out
