"""Confidence of the rule-inference adversary and derived privacy quantities.

Given an announced rule ``m`` (dataset-indexed) and an observed outcome ``a``,
the adversary's confidence that the target is record ``k`` of its QID group is
P(x_k) * P(a | x_k) normalised over the group.  Uncertainty uses natural logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .dataset import QidGroup
from .errors import IndexOutOfGroup

CHECK_TOL = 1e-9


def _local(g: QidGroup, m) -> np.ndarray:
    return g.take(m)


def _outcome_masses(g: QidGroup, m, a: int) -> np.ndarray:
    x = _local(g, m)
    if a == 1:
        return g.p * x
    if a == 0:
        return g.p * (1.0 - x)
    raise ValueError(f"outcome must be 0 or 1, got {a!r}")


def confidence(g: QidGroup, m, k: int, a: int) -> float | None:
    """Confidence that the target is member ``k``; None if ``a`` cannot occur."""
    if not 0 <= k < g.size:
        raise IndexOutOfGroup(f"member {k} not in group of size {g.size}")
    joint = _outcome_masses(g, m, a)
    total = joint.sum()
    if total <= 0.0:
        return None
    return float(joint[k] / total)


def confidence_table(g: QidGroup, m) -> np.ndarray:
    """Shape (2, size) table indexed [a, k]; rows of impossible outcomes are NaN."""
    out = np.full((2, g.size), np.nan)
    for a in (0, 1):
        joint = _outcome_masses(g, m, a)
        total = joint.sum()
        if total > 0.0:
            out[a] = joint / total
    return out


def group_max_confidence(g: QidGroup, m) -> float:
    return float(kernels.max_confidence(g.p, _local(g, m)))


def c_star(g: QidGroup) -> float:
    """Max confidence when the true rule itself is announced."""
    return float(kernels.max_confidence(g.p, g.d))


def beta_min(g: QidGroup) -> float:
    """Largest prior of any member; no announcement can push confidence below it."""
    return float(g.p.max() / g.p.sum())


class BetaCheck(NamedTuple):
    ok: bool
    violations: list


def check_beta(g: QidGroup, m, beta: float, tol: float = CHECK_TOL) -> BetaCheck:
    """List every (member, outcome) whose confidence exceeds ``beta``."""
    table = confidence_table(g, m)
    bad = []
    for k in range(g.size):
        for a in (0, 1):
            c = table[a, k]
            if not np.isnan(c) and c > beta + tol:
                bad.append((k, a))
    return BetaCheck(not bad, bad)


def min_uncertainty(g: QidGroup, m) -> float:
    c = group_max_confidence(g, m)
    return math.inf if c <= 0.0 else -math.log(c)


@dataclass
class ConfidenceReport:
    qids: list
    group_max: list
    table: list

    @property
    def global_max(self) -> float:
        return max(self.group_max) if self.group_max else 0.0


def confidence_report(groups, m) -> ConfidenceReport:
    qids, maxes, tables = [], [], []
    for g in groups:
        qids.append(g.qid)
        maxes.append(group_max_confidence(g, m))
        tables.append(confidence_table(g, m))
    return ConfidenceReport(qids, maxes, tables)
