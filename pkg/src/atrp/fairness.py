"""Group and individual fairness measures on true and announced rules.

Group measures compare expected positive-decision rates between protected
groups: statistical parity (SP) as a difference, its conditional variant (CSP)
restricted to records matching a condition, and the p%-rule (PR) as a ratio.
Individual fairness checks a Lipschitz condition over record pairs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernels
from .dataset import WeightedDataset
from .errors import EmptySelection, ZeroDenominator
from .fidelity import FidelitySpec, bias_distortion_bound

log = logging.getLogger(__name__)

TV = "total-variation"
REL = "relative-metric"
FAMILY_CODES = {"tv": 0, "rel_inf": 1}

FAIRNESS_NOTES = {
    "tv_normalisation": (
        "outcome distance is (1/|A|) * sum_a |Z1(a) - Z2(a)| with |A| = 2, which for binary "
        "decisions equals |d1 - d2|, the same number the SP/CSP bias reports"
    ),
    "relative_metric_log_base": "e",
    "relative_metric_zero": "a probability that is zero on one side only makes the pair incomparable (infinite)",
}


def _as_set(v):
    if isinstance(v, (set, frozenset, list, tuple)):
        return frozenset(str(x) for x in v)
    return frozenset([str(v)])


@dataclass(frozen=True)
class GroupSelector:
    """Records whose attributes match ``where``, optionally also ``condition``.

    Each constraint maps an attribute name to one value or a set of values.
    """

    where: Mapping
    condition: Mapping | None = None

    def with_condition(self, condition: Mapping) -> "GroupSelector":
        return GroupSelector(self.where, condition)

    def mask(self, ds: WeightedDataset) -> np.ndarray:
        out = np.ones(len(ds), dtype=bool)
        for constraints in (self.where, self.condition or {}):
            for name, allowed in constraints.items():
                col = np.array(ds.column(name), dtype=object)
                out &= np.isin(col, list(_as_set(allowed)))
        return out

    def label(self) -> str:
        parts = [f"{k}={v}" for k, v in self.where.items()]
        if self.condition:
            parts += [f"{k}={v}" for k, v in self.condition.items()]
        return ",".join(parts)


def group_rate(ds: WeightedDataset, m, sel: GroupSelector) -> float:
    mask = sel.mask(ds)
    if not mask.any():
        raise EmptySelection(f"selector {sel.label()} matches no records")
    p = ds.p[mask]
    return float(np.dot(p, np.asarray(m, dtype=float)[mask]) / p.sum())


def sp_bias(ds: WeightedDataset, m, sel1: GroupSelector, sel2: GroupSelector) -> float:
    return abs(group_rate(ds, m, sel1) - group_rate(ds, m, sel2))


def csp_bias(ds: WeightedDataset, m, sel1: GroupSelector, sel2: GroupSelector, condition: Mapping) -> float:
    return sp_bias(ds, m, sel1.with_condition(condition), sel2.with_condition(condition))


def p_rule_ratio(ds: WeightedDataset, m, sel1: GroupSelector, sel2: GroupSelector) -> float:
    denom = group_rate(ds, m, sel2)
    if denom == 0.0:
        raise ZeroDenominator(f"group {sel2.label()} has a zero positive rate")
    return group_rate(ds, m, sel1) / denom


def p_rule_compliant(ratio: float, p: float = 0.8) -> bool:
    return p <= ratio <= 1.0 / p


def distribution_distance(z1, z2, family: str = "tv") -> float:
    """Distance between two outcome distributions given as probability vectors."""
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    if family == "tv":
        return float(np.abs(z1 - z2).sum() / z1.size)
    worst = 0.0
    for a, b in zip(z1, z2):
        if a == 0.0 and b == 0.0:
            continue
        if a == 0.0 or b == 0.0:
            return math.inf
        worst = max(worst, abs(math.log(a / b)))
    return worst


def outcome_distance(z1: float, z2: float, family: str = "tv") -> float:
    """Distance between two binary outcome distributions given by P(positive)."""
    if family == "tv":
        # (1/2)(|z1 - z2| + |(1 - z1) - (1 - z2)|) collapses to |z1 - z2|
        return abs(z1 - z2)
    return distribution_distance([1.0 - z1, z1], [1.0 - z2, z2], family)


@dataclass
class IndividualFairness:
    violation: float
    pair: tuple | None
    family: str
    incomparable: bool = False

    @property
    def compliant(self) -> bool:
        return self.violation <= 0.0


def hamming_distance(ds: WeightedDataset) -> np.ndarray:
    codes = ds.codes
    return (codes[:, None, :] != codes[None, :, :]).mean(axis=2)


def individual_fairness_violation(ds: WeightedDataset, m, metric=None, family: str = "tv",
                                  epsilon: float = 0.0) -> IndividualFairness:
    """Worst Lipschitz violation over record pairs; ``<= 0`` means compliant.

    ``metric`` is an (n, n) record-distance matrix; the default is the Hamming
    distance over all attributes divided by the attribute count.
    """
    if family not in FAMILY_CODES:
        raise ValueError(f"family must be 'tv' or 'rel_inf', got {family!r}")
    x = np.asarray(m, dtype=float)
    n = x.size
    if n < 2:
        return IndividualFairness(-math.inf, None, family)
    if metric is None:
        best, i, j = kernels.pairwise_violation(x, ds.codes, float(epsilon), FAMILY_CODES[family])
    else:
        dist = np.asarray(metric, dtype=float)
        if dist.shape != (n, n) or (dist < 0).any():
            raise ValueError("metric must be a nonnegative (n, n) matrix")
        iu, ju = np.triu_indices(n, 1)
        dv = np.array([outcome_distance(x[a], x[b], family) for a, b in zip(iu, ju)])
        v = dv - dist[iu, ju] - epsilon
        k = int(np.argmax(v))
        best, i, j = float(v[k]), int(iu[k]), int(ju[k])
    best = float(best)
    return IndividualFairness(best, (int(i), int(j)), family, incomparable=math.isinf(best))


@dataclass
class FairnessMeasure:
    name: str
    groups: tuple
    value_true: float
    value_announced: float
    bound: float | None
    family: str
    condition: dict | None = None

    @property
    def distortion(self) -> float:
        return abs(self.value_announced - self.value_true)

    @property
    def holds(self) -> bool | None:
        if self.bound is None or math.isinf(self.distortion) or math.isnan(self.distortion):
            return None
        return self.distortion <= self.bound + 1e-12

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "groups": list(self.groups),
            "condition": self.condition,
            "value_true": self.value_true,
            "value_announced": self.value_announced,
            "distortion": self.distortion,
            "bound": self.bound,
            "family": self.family,
            "bound_holds": self.holds,
        }


@dataclass
class FairnessReport:
    group_by: str
    rates_true: dict
    rates_announced: dict
    measures: list
    notes: dict = field(default_factory=lambda: dict(FAIRNESS_NOTES))

    def measure(self, name, condition=None):
        for mobj in self.measures:
            if mobj.name == name and mobj.condition == condition:
                return mobj
        raise KeyError((name, condition))

    @property
    def bounds_hold(self) -> bool:
        return all(mobj.holds is not False for mobj in self.measures)

    def to_dict(self) -> dict:
        return {
            "group_by": self.group_by,
            "rates_true": self.rates_true,
            "rates_announced": self.rates_announced,
            "measures": [mobj.to_dict() for mobj in self.measures],
            "notes": dict(self.notes),
        }


def _bound_for(spec: FidelitySpec | None, family: str):
    if spec is None or spec.kind == "explicit":
        return None
    if (family == TV) == (spec.kind == "delta"):
        return bias_distortion_bound(spec)
    return None


def fairness_report(ds: WeightedDataset, d_true, d_tilde, spec: FidelitySpec | None,
                    group_by: str, conditions=(), measures=("sp", "csp", "pr"),
                    p: float = 0.8, epsilon: float = 0.0) -> FairnessReport:
    """Evaluate each measure on both rules and attach its distortion bound.

    ``conditions`` lists attribute names (every value is used) or
    ``(attribute, value)`` pairs for CSP.  Groups are the values of
    ``group_by`` in domain order; every pair is compared.
    """
    values = ds.schema.domains[ds.schema.index(group_by)]
    sels = {v: GroupSelector({group_by: v}) for v in values}
    rates_t = {v: group_rate(ds, d_true, s) for v, s in sels.items()}
    rates_a = {v: group_rate(ds, d_tilde, s) for v, s in sels.items()}

    cond_list = []
    for c in conditions:
        if isinstance(c, str):
            dom = ds.schema.domains[ds.schema.index(c)]
            cond_list += [{c: v} for v in dom]
        else:
            cond_list.append({c[0]: c[1]})

    out = []
    pairs = [(values[i], values[j]) for i in range(len(values)) for j in range(i + 1, len(values))]
    for g1, g2 in pairs:
        s1, s2 = sels[g1], sels[g2]
        if "sp" in measures:
            out.append(FairnessMeasure("sp", (g1, g2), sp_bias(ds, d_true, s1, s2),
                                       sp_bias(ds, d_tilde, s1, s2), _bound_for(spec, TV), TV))
        if "csp" in measures:
            for cond in cond_list:
                out.append(FairnessMeasure("csp", (g1, g2), csp_bias(ds, d_true, s1, s2, cond),
                                           csp_bias(ds, d_tilde, s1, s2, cond), _bound_for(spec, TV),
                                           TV, dict(cond)))
        if "pr" in measures:
            try:
                rt = p_rule_ratio(ds, d_true, s1, s2)
                ra = p_rule_ratio(ds, d_tilde, s1, s2)
            except ZeroDenominator as exc:
                log.warning("p%%-rule skipped for %s/%s: %s", g1, g2, exc)
            else:
                out.append(FairnessMeasure("pr", (g1, g2), rt, ra, None, REL))
                # the bounded quantity for the relative family is |log ratio|
                lt = abs(math.log(rt)) if rt > 0 else math.inf
                la = abs(math.log(ra)) if ra > 0 else math.inf
                out.append(FairnessMeasure("pr_log", (g1, g2), lt, la, _bound_for(spec, REL), REL))
    if "individual" in measures:
        fam = "tv" if spec is None or spec.kind != "alpha" else "rel_inf"
        it = individual_fairness_violation(ds, d_true, family=fam, epsilon=epsilon)
        ia = individual_fairness_violation(ds, d_tilde, family=fam, epsilon=epsilon)
        family = TV if fam == "tv" else REL
        out.append(FairnessMeasure("individual", (), it.violation, ia.violation,
                                   _bound_for(spec, family), family))

    report = FairnessReport(group_by, rates_t, rates_a, out)
    for mobj in out:
        if mobj.holds is False:
            log.warning("distortion bound exceeded for %s %s: %.6g > %.6g",
                        mobj.name, mobj.groups, mobj.distortion, mobj.bound)
    return report
