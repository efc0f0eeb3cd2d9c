"""JSON serialisation of solver, audit and fairness results."""

from __future__ import annotations

import json
import math

import numpy as np

from .dataset import WeightedDataset
from .errors import SchemaError
from .fidelity import FidelityBounds, FidelitySpec
from .solver import MasterSolution

SIG_DIGITS = 12


def _round(x):
    if isinstance(x, (bool, np.bool_)) or x is None:
        return None if x is None else bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(x, dict):
        return {str(k): _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_round(v) for v in x]
    return x


def dumps(obj) -> str:
    return json.dumps(_round(obj), indent=2, ensure_ascii=False) + "\n"


def master_to_dict(ds: WeightedDataset, sol: MasterSolution, bounds: FidelityBounds, meta=None) -> dict:
    names = ds.schema.names
    pub = ds.schema.public_names
    groups = []
    for g, gs in zip(sol.groups, sol.solutions):
        members = []
        for local, i in enumerate(g.indices):
            members.append({
                "x": dict(zip(names, ds.records[i].values)),
                "p": ds.p[i],
                "d": ds.d[i],
                "d_tilde": gs.d_tilde[local],
                "bounds": [bounds.lo[i], bounds.hi[i]],
            })
        groups.append({
            "qid": dict(zip(pub, g.qid)),
            "beta0": gs.beta0,
            "beta1": gs.beta1,
            "beta_p": gs.beta_p,
            "beta_min": gs.beta_min,
            "beta_star": gs.beta_star,
            "achieved_conf": gs.achieved_conf,
            "case": gs.case,
            "notes": gs.notes,
            "members": members,
        })
    out = {
        "beta_star": sol.beta_star,
        "fidelity": sol.spec.to_dict() if sol.spec else None,
        "groups": groups,
        "metadata": dict(sol.notes),
    }
    if meta:
        out["metadata"].update(meta)
    return out


def mapping_from_report(ds: WeightedDataset, report: dict) -> np.ndarray:
    """Announced rule stored in a solve report, aligned to ``ds`` order."""
    names = ds.schema.names
    lookup = {}
    for grp in report.get("groups", []):
        for mem in grp["members"]:
            key = tuple(str(mem["x"][n]) for n in names)
            lookup[key] = float(mem["d_tilde"])
    out = np.empty(len(ds))
    for i, r in enumerate(ds.records):
        if r.values not in lookup:
            raise SchemaError(f"report has no announced rule for record {r.values}")
        out[i] = lookup[r.values]
    return out


def spec_from_report(report: dict) -> FidelitySpec | None:
    fid = report.get("fidelity")
    return FidelitySpec.from_config(fid) if fid else None
