"""Inference attacks by an honest-but-curious reader of a transparency report.

Two attacks are simulated.  The posterior attack combines published decision
rules with a prior over sensitive values (side information) and an observed
outcome.  The inversion attack reconstructs per-cell decision rules from
published group rates and conditional parity biases plus one disclosed cell.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .dataset import WeightedDataset
from .errors import DatasetError, MissingColumn, UndefinedPosterior, Unresolvable

ROW_SUM_TOL = 1e-6
ZERO_BIAS_TOL = 1e-12
PROB_COLUMN = "probability"


@dataclass
class SideInformation:
    """Adversary prior P(sensitive | public), keyed by value tuples."""

    public_names: tuple
    sensitive_names: tuple
    table: dict

    def __post_init__(self):
        for pub, row in self.table.items():
            total = sum(row.values())
            if abs(total - 1.0) > ROW_SUM_TOL:
                raise DatasetError(f"side information for {pub} sums to {total}, not 1")
            if any(v < 0 for v in row.values()):
                raise DatasetError(f"side information for {pub} has a negative probability")

    def prior(self, public) -> dict:
        key = tuple(public)
        if key not in self.table:
            raise KeyError(f"no side information for public values {key}")
        return self.table[key]

    @classmethod
    def from_dataset(cls, ds: WeightedDataset) -> "SideInformation":
        """Empirical conditional distribution of the dataset itself."""
        mass: dict = {}
        for i in range(len(ds)):
            row = mass.setdefault(ds.public_values(i), {})
            s = ds.sensitive_values(i)
            row[s] = row.get(s, 0.0) + float(ds.p[i])
        table = {pub: {s: v / sum(row.values()) for s, v in row.items()} for pub, row in mass.items()}
        return cls(ds.schema.public_names, ds.schema.sensitive_names, table)

    @classmethod
    def from_csv(cls, path, public_names, sensitive_names) -> "SideInformation":
        path = Path(path)
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            for col in list(public_names) + list(sensitive_names) + [PROB_COLUMN]:
                if col not in header:
                    raise MissingColumn(f"{path}: missing column {col!r}")
            table: dict = {}
            for row in reader:
                pub = tuple(row[n].strip() for n in public_names)
                sens = tuple(row[n].strip() for n in sensitive_names)
                table.setdefault(pub, {})[sens] = float(row[PROB_COLUMN])
        return cls(tuple(public_names), tuple(sensitive_names), table)


def rules_from_mapping(ds: WeightedDataset, m) -> dict:
    """Published rules keyed by (public values, sensitive values)."""
    m = np.asarray(m, dtype=float)
    return {(ds.public_values(i), ds.sensitive_values(i)): float(m[i]) for i in range(len(ds))}


@dataclass
class PosteriorResult:
    public: tuple
    outcome: int
    prior: dict
    posterior: dict

    def amplification(self, sensitive) -> float:
        pr = self.prior[sensitive]
        return math.inf if pr == 0 else self.posterior[sensitive] / pr

    @property
    def max_posterior(self) -> float:
        return max(self.posterior.values())


def posterior_attack(side: SideInformation, rules: Mapping, public, outcome: int) -> PosteriorResult:
    """Bayes posterior over sensitive values given a public record and outcome."""
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    public = tuple(public)
    prior = side.prior(public)
    joint = {}
    for s, pr in prior.items():
        if (public, s) not in rules:
            raise KeyError(f"no published rule for {public} / {s}")
        d = rules[(public, s)]
        joint[s] = pr * (d if outcome == 1 else 1.0 - d)
    total = sum(joint.values())
    if total <= 0.0:
        raise UndefinedPosterior(f"outcome {outcome} has zero likelihood for public values {public}")
    return PosteriorResult(public, outcome, dict(prior), {s: v / total for s, v in joint.items()})


def rule_inference_confidence(side: SideInformation, rules: Mapping, public, outcome: int,
                              sensitive) -> float:
    return posterior_attack(side, rules, public, outcome).posterior[tuple(sensitive)]


def max_posterior(side: SideInformation, rules: Mapping) -> float:
    """Largest posterior over every public value, outcome and sensitive value."""
    best = 0.0
    for public in side.table:
        for a in (0, 1):
            try:
                best = max(best, posterior_attack(side, rules, public, a).max_posterior)
            except UndefinedPosterior:
                continue
    return best


@dataclass
class InversionReport:
    """What a published fairness report reveals, plus one disclosed cell.

    ``groups`` are the two protected-group values; ``conditions`` the CSP
    condition values in order; ``weights[g][j]`` is the side-information
    share of condition ``j`` inside group ``g``.
    """

    groups: tuple
    conditions: tuple
    weights: dict
    rates: dict
    csp: dict
    known_group: str
    known_condition: str
    known_value: float


@dataclass
class InversionResult:
    branch: dict
    intermediate: dict
    final: dict
    clamped: list = field(default_factory=list)
    rejected: dict = field(default_factory=dict)

    def rules_for(self, group, which="final") -> tuple:
        table = getattr(self, which)
        return tuple(table[group])


def _branch_system(rep: InversionReport, signs: dict):
    """Linear system in the known group's unknown cells for one sign pattern.

    The other group's cells are the known group's cells shifted by
    ``-sign * bias``, recorded in ``shift`` so ``other[j] = known[j] + shift[j]``.
    """
    g_known = rep.known_group
    g_other = rep.groups[1] if g_known == rep.groups[0] else rep.groups[0]
    # signs[j] = +1 means known - other = +bias
    shift = {j: -signs[j] * rep.csp[j] for j in rep.conditions}
    free = [j for j in rep.conditions if j != rep.known_condition]
    v = rep.known_value
    jk = rep.known_condition
    a_known = [rep.weights[g_known][j] for j in free]
    r_known = rep.rates[g_known] - rep.weights[g_known][jk] * v
    a_other = [rep.weights[g_other][j] for j in free]
    r_other = rep.rates[g_other] - sum(rep.weights[g_other][j] * shift[j] for j in rep.conditions)
    r_other -= rep.weights[g_other][jk] * v
    A = np.array([a_known, a_other], dtype=float)
    rhs = np.array([r_known, r_other], dtype=float)
    return A, rhs, free, shift, g_other


def _cell_box(rep, free, shift):
    """Range each free cell may take so that both groups' cells stay in [0, 1]."""
    lo = np.array([max(0.0, -shift[j]) for j in free])
    hi = np.array([min(1.0, 1.0 - shift[j]) for j in free])
    return lo, hi


def _equations_satisfiable(A, rhs, lo, hi, tol=1e-9) -> bool:
    if (lo > hi + tol).any():
        return False
    for row, r in zip(A, rhs):
        low = np.sum(np.where(row >= 0, row * lo, row * hi))
        high = np.sum(np.where(row >= 0, row * hi, row * lo))
        if r < low - tol or r > high + tol:
            return False
    return True


def fairness_inversion(rep: InversionReport, slack: float = 0.1) -> InversionResult:
    """Recover both groups' per-condition rules from a published report.

    Each nonzero CSP bias hides a sign.  A sign pattern is rejected when one of
    its rate equations cannot be met with every rule in [0, 1], or when its
    exact solution strays further than ``slack`` outside [0, 1].  Exactly one
    pattern must survive.  Residual out-of-range values of the survivor are
    clamped and the known group's rate equation is re-solved for the rest.
    """
    n = len(rep.conditions)
    if n < 2 or n > 3:
        raise Unresolvable(f"inversion supports 2 groups x 2..3 conditions, got {n} conditions")
    if len(rep.groups) != 2 or rep.known_group not in rep.groups:
        raise Unresolvable("report must name exactly two groups, one of them holding the known cell")
    nonzero = [j for j in rep.conditions if abs(rep.csp[j]) > ZERO_BIAS_TOL]
    survivors = []
    rejected = {}
    for pattern in itertools.product((1, -1), repeat=len(nonzero)):
        signs = {j: 0 for j in rep.conditions}
        signs.update(dict(zip(nonzero, pattern)))
        A, rhs, free, shift, g_other = _branch_system(rep, signs)
        lo, hi = _cell_box(rep, free, shift)
        key = tuple(sorted((j, s) for j, s in signs.items() if s))
        known_other = rep.known_value + shift[rep.known_condition]
        if not (-1e-9 <= known_other <= 1 + 1e-9):
            rejected[key] = "disclosed cell forces the other group outside [0, 1]"
            continue
        if not _equations_satisfiable(A, rhs, lo, hi):
            rejected[key] = "a rate equation is unsatisfiable with rules in [0, 1]"
            continue
        sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        cells = list(sol) + [sol[i] + shift[j] for i, j in enumerate(free)]
        if min(cells) < -slack or max(cells) > 1.0 + slack:
            rejected[key] = f"exact solution {np.round(sol, 6).tolist()} lies outside [0, 1] beyond slack"
            continue
        survivors.append((signs, A, rhs, free, shift, g_other, sol))

    if not survivors:
        raise Unresolvable(f"no sign pattern is consistent with the report: {rejected}")
    if len(survivors) > 1:
        raise Unresolvable(f"{len(survivors)} sign patterns remain feasible; refusing to guess")
    signs, A, rhs, free, shift, g_other, sol = survivors[0]

    g_known = rep.known_group
    inter_known = {rep.known_condition: rep.known_value}
    inter_known.update({j: float(v) for j, v in zip(free, sol)})
    intermediate = {
        g_known: [inter_known[j] for j in rep.conditions],
        g_other: [inter_known[j] + shift[j] for j in rep.conditions],
    }

    values = dict(zip(free, sol))
    clamped = []
    for j in free:
        if values[j] < 0.0 or values[j] > 1.0:
            values[j] = min(1.0, max(0.0, values[j]))
            clamped.append(j)
    rest = [j for j in free if j not in clamped]
    if clamped and rest:
        w = rep.weights[g_known]
        target = rep.rates[g_known] - w[rep.known_condition] * rep.known_value
        target -= sum(w[j] * values[j] for j in clamped)
        if len(rest) == 1:
            j = rest[0]
            values[j] = min(1.0, max(0.0, target / w[j]))
        else:
            coeffs = np.array([w[j] for j in rest])
            share = target * coeffs / float(np.dot(coeffs, coeffs))
            for j, v in zip(rest, share):
                values[j] = min(1.0, max(0.0, float(v)))
    known_final = {rep.known_condition: rep.known_value, **values}
    final = {
        g_known: [float(known_final[j]) for j in rep.conditions],
        g_other: [float(min(1.0, max(0.0, known_final[j] + shift[j]))) for j in rep.conditions],
    }
    branch = {j: s for j, s in signs.items()}
    return InversionResult(branch, intermediate, final, clamped, rejected)


def report_from_published(published: Mapping, side: SideInformation, group_attr: str,
                          condition_attr: str, known_group: str, known_condition: str,
                          known_value: float) -> InversionReport:
    """Assemble an inversion input from a fairness JSON section and side info.

    ``published`` needs ``rates`` (group -> rate) and ``csp`` (condition value ->
    bias).  Weights come from side information restricted to the two groups.
    """
    groups = tuple(published["rates"].keys())
    if len(groups) != 2:
        raise Unresolvable(f"need exactly two group rates, got {groups}")
    conditions = tuple(published["csp"].keys())
    gpos = side.public_names.index(group_attr) if group_attr in side.public_names else None
    cpos = side.sensitive_names.index(condition_attr) if condition_attr in side.sensitive_names else None
    if gpos is None or cpos is None:
        raise Unresolvable("group attribute must be public and condition attribute sensitive in the side info")
    weights = {}
    for g in groups:
        w = {c: 0.0 for c in conditions}
        for pub, row in side.table.items():
            if pub[gpos] != g:
                continue
            for sens, pr in row.items():
                if sens[cpos] in w:
                    w[sens[cpos]] += pr
        weights[g] = w
    return InversionReport(groups, conditions, weights,
                           {g: float(published["rates"][g]) for g in groups},
                           {c: float(published["csp"][c]) for c in conditions},
                           known_group, known_condition, float(known_value))
