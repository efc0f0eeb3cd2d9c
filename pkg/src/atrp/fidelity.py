"""Fidelity constraints: how far an announced rule may move from the truth.

Two families are supported.  ``delta`` bounds the total-variation distance
between true and announced outcome distributions by ``1 - delta``; ``alpha``
bounds their log ratio by ``-ln(alpha)``.  ``explicit`` accepts arbitrary
per-record intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import EmptyBounds, UnsupportedSpec

KINDS = ("delta", "alpha", "explicit")
_EMPTY_TOL = 1e-12


@dataclass(frozen=True)
class FidelitySpec:
    kind: str
    value: float | None = None
    lo: tuple | None = None
    hi: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedSpec(f"unknown fidelity kind {self.kind!r}")
        if self.kind in ("delta", "alpha"):
            if self.value is None or not (0.0 <= float(self.value) <= 1.0):
                raise UnsupportedSpec(f"{self.kind} must lie in [0, 1], got {self.value!r}")
        elif self.lo is None or self.hi is None:
            raise UnsupportedSpec("explicit fidelity needs 'lo' and 'hi' arrays")

    @classmethod
    def delta(cls, value):
        return cls("delta", float(value))

    @classmethod
    def alpha(cls, value):
        return cls("alpha", float(value))

    @classmethod
    def explicit(cls, lo, hi):
        return cls("explicit", None, tuple(map(float, lo)), tuple(map(float, hi)))

    @classmethod
    def from_config(cls, cfg: Mapping) -> "FidelitySpec":
        """Parse ``{"type": "delta", "value": 0.9}``.

        Explicit intervals come as ``"bounds": [[lo, hi], ...]`` in dataset order.
        A top-level ``{"fidelity": {...}}`` wrapper is accepted too.
        """
        if "fidelity" in cfg:
            cfg = cfg["fidelity"]
        kind = cfg.get("type", cfg.get("kind", "explicit" if "bounds" in cfg else None))
        if kind == "explicit":
            pairs = cfg.get("bounds")
            if pairs is None:
                raise UnsupportedSpec("explicit fidelity needs a 'bounds' array")
            try:
                lo, hi = zip(*[(float(a), float(b)) for a, b in pairs])
            except (TypeError, ValueError):
                raise UnsupportedSpec("'bounds' must be a list of [lo, hi] pairs") from None
            return cls.explicit(lo, hi)
        if kind is None or "value" not in cfg:
            raise UnsupportedSpec(f"cannot read fidelity from {dict(cfg)!r}")
        return cls(kind, float(cfg["value"]))

    def to_dict(self) -> dict:
        if self.kind == "explicit":
            return {"type": "explicit", "bounds": [[a, b] for a, b in zip(self.lo, self.hi)]}
        return {"type": self.kind, "value": self.value}


@dataclass(frozen=True)
class FidelityBounds:
    """Per-record interval [lo, hi] for the announced positive probability."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        if self.lo.shape != self.hi.shape:
            raise ValueError("lo and hi must have the same shape")
        bad = np.flatnonzero(self.lo > self.hi + _EMPTY_TOL)
        if bad.size:
            k = int(bad[0])
            raise EmptyBounds(f"record {k}: lower bound {self.lo[k]} exceeds upper bound {self.hi[k]}")

    def __len__(self):
        return int(self.lo.size)

    @property
    def y_lo(self) -> np.ndarray:
        """Lower bound on the announced negative probability."""
        return 1.0 - self.hi

    @property
    def y_hi(self) -> np.ndarray:
        return 1.0 - self.lo

    def contains(self, x, tol=1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))


def bounds_from_delta(d, delta: float) -> FidelityBounds:
    d = np.asarray(d, dtype=float)
    slack = 1.0 - float(delta)
    lo = np.maximum(0.0, d - slack)
    hi = np.minimum(1.0, d + slack)
    return FidelityBounds(lo, hi)


def bounds_from_alpha(d, alpha: float) -> FidelityBounds:
    d = np.asarray(d, dtype=float)
    alpha = float(alpha)
    pinned = (d == 0.0) | (d == 1.0)
    if alpha == 0.0:
        lo = np.where(pinned, d, 0.0)
        hi = np.where(pinned, d, 1.0)
        return FidelityBounds(lo, hi)
    # positive outcome: alpha <= x/d <= 1/alpha; negative outcome likewise on 1-x
    lo = np.maximum(alpha * d, 1.0 - (1.0 - d) / alpha)
    hi = np.minimum(d / alpha, 1.0 - alpha * (1.0 - d))
    # both intervals contain d; guard against cancellation in 1 - (1 - d)
    lo = np.clip(np.minimum(lo, d), 0.0, 1.0)
    hi = np.clip(np.maximum(hi, d), 0.0, 1.0)
    lo = np.where(pinned, d, lo)
    hi = np.where(pinned, d, hi)
    return FidelityBounds(lo, hi)


def bounds_for(spec: FidelitySpec, d) -> FidelityBounds:
    if spec.kind == "delta":
        return bounds_from_delta(d, spec.value)
    if spec.kind == "alpha":
        return bounds_from_alpha(d, spec.value)
    lo = np.asarray(spec.lo, dtype=float)
    hi = np.asarray(spec.hi, dtype=float)
    n = np.asarray(d).size
    if lo.size != n or hi.size != n:
        raise UnsupportedSpec(f"explicit bounds have length {lo.size}/{hi.size}, dataset has {n} records")
    if (lo < 0).any() or (hi > 1).any():
        raise UnsupportedSpec("explicit bounds must lie within [0, 1]")
    return FidelityBounds(lo, hi)


def bias_distortion_bound(spec: FidelitySpec) -> float:
    """Largest change in a group-fairness bias the announcement can cause."""
    if spec.kind == "delta":
        return min(2.0 * (1.0 - spec.value), 1.0)
    if spec.kind == "alpha":
        if spec.value == 0.0:
            return 1.0
        return min(-2.0 * math.log(spec.value), 1.0)
    raise UnsupportedSpec("no distortion bound for explicit fidelity intervals")
