"""Weighted categorical datasets, the true decision rule, and QID groups.

A dataset is a list of distinct attribute-value vectors, each with a
population count and the probability ``d`` of a positive decision.  Every
per-record array in the package (decision rules, announced rules,
fidelity bounds) is indexed in dataset order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BadProbability,
    ConflictingRule,
    DatasetError,
    MissingColumn,
    SchemaError,
    ZeroTotal,
)

PUBLIC = "public"
SENSITIVE = "sensitive"
COUNT_COLUMN = "count"
RULE_COLUMN = "d"
_RESERVED = (COUNT_COLUMN, RULE_COLUMN)
_RULE_AGREE_TOL = 1e-12


@dataclass(frozen=True)
class AttributeSchema:
    names: tuple[str, ...]
    roles: tuple[str, ...]
    domains: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if not (len(self.names) == len(self.roles) == len(self.domains)):
            raise SchemaError("names, roles and domains must have equal length")
        if len(set(self.names)) != len(self.names):
            raise SchemaError(f"duplicate attribute names in {self.names}")
        bad = [r for r in self.roles if r not in (PUBLIC, SENSITIVE)]
        if bad:
            raise SchemaError(f"unknown roles {bad}")
        if PUBLIC not in self.roles or SENSITIVE not in self.roles:
            raise SchemaError("schema needs at least one public and one sensitive attribute")

    @property
    def arity(self) -> int:
        return len(self.names)

    @property
    def public_idx(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r == PUBLIC)

    @property
    def sensitive_idx(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r == SENSITIVE)

    @property
    def public_names(self) -> tuple[str, ...]:
        return tuple(self.names[i] for i in self.public_idx)

    @property
    def sensitive_names(self) -> tuple[str, ...]:
        return tuple(self.names[i] for i in self.sensitive_idx)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SchemaError(f"unknown attribute {name!r}") from None


@dataclass(frozen=True)
class WeightedRecord:
    values: tuple[str, ...]
    count: int
    d: float


@dataclass(frozen=True)
class WeightedDataset:
    schema: AttributeSchema
    records: tuple[WeightedRecord, ...]

    def __post_init__(self):
        if not self.records:
            raise ZeroTotal("dataset has no records")
        seen = set()
        for r in self.records:
            if len(r.values) != self.schema.arity:
                raise SchemaError(f"record {r.values} does not match schema arity {self.schema.arity}")
            for v, dom, name in zip(r.values, self.schema.domains, self.schema.names):
                if v not in dom:
                    raise SchemaError(f"value {v!r} not in domain of {name!r}")
            if r.count < 1:
                raise DatasetError(f"record {r.values} has count {r.count}; counts must be >= 1")
            if not (0.0 <= r.d <= 1.0) or math.isnan(r.d):
                raise BadProbability(f"record {r.values} has d={r.d} outside [0, 1]")
            if r.values in seen:
                raise ConflictingRule(f"duplicate record {r.values}")
            seen.add(r.values)

    @classmethod
    def from_rows(cls, schema: AttributeSchema, rows: Iterable[tuple[Sequence[str], int, float]]):
        """Build from ``(values, count, d)`` rows, merging exact duplicates."""
        merged: dict[tuple[str, ...], list] = {}
        for values, count, d in rows:
            key = tuple(str(v) for v in values)
            if key in merged:
                if abs(merged[key][1] - d) > _RULE_AGREE_TOL:
                    raise ConflictingRule(
                        f"record {key} appears with d={merged[key][1]} and d={d}"
                    )
                merged[key][0] += int(count)
            else:
                merged[key] = [int(count), float(d)]
        records = tuple(WeightedRecord(k, c, d) for k, (c, d) in merged.items())
        return cls(schema, records)

    def __len__(self):
        return len(self.records)

    @property
    def total(self) -> int:
        return sum(r.count for r in self.records)

    @cached_property
    def counts(self) -> np.ndarray:
        return np.array([r.count for r in self.records], dtype=np.int64)

    @cached_property
    def p(self) -> np.ndarray:
        """Joint distribution P(x) over records."""
        return self.counts / float(self.counts.sum())

    @cached_property
    def d(self) -> np.ndarray:
        return np.array([r.d for r in self.records], dtype=float)

    @cached_property
    def codes(self) -> np.ndarray:
        """Integer code of every attribute value, shape (n, arity)."""
        out = np.empty((len(self.records), self.schema.arity), dtype=np.int64)
        for i, r in enumerate(self.records):
            for j, v in enumerate(r.values):
                out[i, j] = self.schema.domains[j].index(v)
        return out

    def public_values(self, i: int) -> tuple[str, ...]:
        vals = self.records[i].values
        return tuple(vals[j] for j in self.schema.public_idx)

    def sensitive_values(self, i: int) -> tuple[str, ...]:
        vals = self.records[i].values
        return tuple(vals[j] for j in self.schema.sensitive_idx)

    def column(self, name: str) -> list[str]:
        j = self.schema.index(name)
        return [r.values[j] for r in self.records]


@dataclass(frozen=True)
class QidGroup:
    """Records sharing one public-value vector, in dataset order."""

    qid: tuple[str, ...]
    indices: np.ndarray
    p: np.ndarray
    d: np.ndarray
    labels: tuple[str, ...] = field(default=(), compare=False)

    @classmethod
    def from_arrays(cls, p, d, qid=()):
        """Standalone group (indices 0..m-1) for synthetic experiments."""
        p = np.asarray(p, dtype=float)
        d = np.asarray(d, dtype=float)
        if p.shape != d.shape or p.ndim != 1 or p.size == 0:
            raise ValueError("p and d must be non-empty 1-d arrays of equal length")
        if (p <= 0).any():
            raise ValueError("member probabilities must be positive")
        return cls(tuple(qid), np.arange(p.size), p, d)

    @property
    def size(self) -> int:
        return int(self.p.size)

    @property
    def group_mass(self) -> float:
        return float(self.p.sum())

    @property
    def conditional(self) -> np.ndarray:
        return self.p / self.p.sum()

    @property
    def members(self):
        return [(int(i), float(pk), float(dk)) for i, pk, dk in zip(self.indices, self.p, self.d)]

    def localized(self) -> "QidGroup":
        """Same group re-indexed 0..m-1, detached from its dataset."""
        return QidGroup(self.qid, np.arange(self.size), self.p, self.d, self.labels)

    def take(self, per_record) -> np.ndarray:
        """Slice a dataset-indexed array down to this group's members."""
        return np.asarray(per_record, dtype=float)[self.indices]


def partition_by_qid(ds: WeightedDataset) -> list[QidGroup]:
    buckets: dict[tuple[str, ...], list[int]] = {}
    for i in range(len(ds)):
        buckets.setdefault(ds.public_values(i), []).append(i)
    groups = []
    for qid, idx in buckets.items():
        idx = np.array(idx, dtype=np.int64)
        labels = tuple("|".join(ds.sensitive_values(i)) for i in idx)
        groups.append(QidGroup(qid, idx, ds.p[idx], ds.d[idx], labels))
    return groups


def _parse_roles(header: Sequence[str], config) -> tuple[list[str], list[str]]:
    if isinstance(config, AttributeSchema):
        return list(config.public_names), list(config.sensitive_names)
    config = dict(config or {})
    public = list(config.get("public", []))
    attrs = [h for h in header if h not in _RESERVED]
    sensitive = list(config.get("sensitive", [a for a in attrs if a not in public]))
    return public, sensitive


def load_dataset(path, config: Mapping | AttributeSchema | None = None) -> WeightedDataset:
    """Read a dataset CSV with reserved ``count`` and ``d`` columns.

    ``config`` assigns roles: ``{"public": [...], "sensitive": [...]}``.
    Attributes not listed as public default to sensitive.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ZeroTotal(f"{path} is empty") from None
        rows = [row for row in reader if any(cell.strip() for cell in row)]

    for col in _RESERVED:
        if col not in header:
            raise MissingColumn(f"{path}: missing reserved column {col!r}")
    public, sensitive = _parse_roles(header, config)
    for name in public + sensitive:
        if name not in header:
            raise MissingColumn(f"{path}: configured attribute {name!r} not in header")
    extra = [h for h in header if h not in _RESERVED and h not in public + sensitive]
    if extra:
        raise SchemaError(f"{path}: columns {extra} have no role")
    if not rows:
        raise ZeroTotal(f"{path}: no data rows")

    names = [h for h in header if h not in _RESERVED]
    pos = {h: i for i, h in enumerate(header)}
    parsed = []
    domains: dict[str, list[str]] = {n: [] for n in names}
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise DatasetError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        values = tuple(row[pos[n]].strip() for n in names)
        for n, v in zip(names, values):
            if v not in domains[n]:
                domains[n].append(v)
        raw_count = row[pos[COUNT_COLUMN]].strip()
        try:
            count = int(raw_count)
        except ValueError:
            raise DatasetError(f"{path}:{lineno}: count {raw_count!r} is not an integer") from None
        if count < 1:
            raise DatasetError(f"{path}:{lineno}: count must be a positive integer, got {count}")
        raw_d = row[pos[RULE_COLUMN]].strip()
        try:
            d = float(raw_d)
        except ValueError:
            raise BadProbability(f"{path}:{lineno}: d {raw_d!r} is not a number") from None
        if not (0.0 <= d <= 1.0):
            raise BadProbability(f"{path}:{lineno}: d={d} outside [0, 1]")
        parsed.append((values, count, d))

    roles = tuple(PUBLIC if n in public else SENSITIVE for n in names)
    schema = AttributeSchema(tuple(names), roles, tuple(tuple(domains[n]) for n in names))
    return WeightedDataset.from_rows(schema, parsed)
