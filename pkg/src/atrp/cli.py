"""Privacy-optimal announced rules for transparency reports, plus audits and attacks.

Exit codes: 0 success, 1 input or I/O error, 2 infeasible fidelity request,
3 verification found a gap above tolerance.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .attack import (
    SideInformation,
    fairness_inversion,
    max_posterior,
    posterior_attack,
    report_from_published,
    rules_from_mapping,
)
from .dataset import load_dataset, partition_by_qid
from .errors import AtrpError, EmptyBounds, GroupSolveError, TooLarge
from .fairness import fairness_report
from .fidelity import FidelitySpec, bounds_for
from .oracle import GridSpec, grid_oracle
from .privacy import confidence_report
from .report import dumps, mapping_from_report, master_to_dict, spec_from_report
from .solver import solve_master, tradeoff_sweep

log = logging.getLogger("atrp")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_GAP = 3


class CliError(AtrpError):
    pass


def _load_config(path):
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _schema_cfg(cfg):
    return cfg.get("schema", {k: cfg[k] for k in ("public", "sensitive") if k in cfg})


def _dataset(args, cfg):
    path = args.data or cfg.get("data")
    if not path:
        raise CliError("no dataset given (use --data or a 'data' entry in the config)")
    return load_dataset(path, _schema_cfg(cfg))


def _spec(args, cfg):
    if getattr(args, "delta", None) is not None:
        return FidelitySpec.delta(args.delta)
    if getattr(args, "alpha", None) is not None:
        return FidelitySpec.alpha(args.alpha)
    if "fidelity" in cfg:
        return FidelitySpec.from_config(cfg["fidelity"])
    return None


def _emit(args, text):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _meta(args):
    return {"seed": args.seed}


def cmd_solve(args, cfg):
    ds = _dataset(args, cfg)
    spec = _spec(args, cfg)
    if spec is None:
        raise CliError("no fidelity given (use --delta, --alpha or a 'fidelity' config entry)")
    bounds = bounds_for(spec, ds.d)
    sol = solve_master(ds, spec, jobs=args.jobs, bounds=bounds)
    _emit(args, dumps(master_to_dict(ds, sol, bounds, _meta(args))))
    return EXIT_OK


def cmd_tradeoff(args, cfg):
    if args.steps < 2:
        raise CliError("--steps must be at least 2")
    ds = _dataset(args, cfg)
    groups = partition_by_qid(ds)
    curves = [tradeoff_sweep(g, args.kind, args.steps) for g in groups]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([args.kind] + ["/".join(g.qid) for g in groups] + ["overall"])
    for i in range(args.steps):
        row = [c[i].beta_star for c in curves]
        w.writerow([f"{curves[0][i].value:.12g}"] + [f"{v:.12g}" for v in row] + [f"{max(row):.12g}"])
    _emit(args, buf.getvalue())
    return EXIT_OK


def _announced(args, cfg, ds):
    """Announced rule from --report, else a fresh solve, else the true rule."""
    if getattr(args, "report", None):
        rep = _read_json(args.report)
        return mapping_from_report(ds, rep), spec_from_report(rep)
    spec = _spec(args, cfg)
    if spec is None:
        log.info("no report or fidelity given; using the true rule as the announcement")
        return ds.d.copy(), None
    log.info("no report given; solving with %s", spec.to_dict())
    return solve_master(ds, spec, jobs=args.jobs).d_tilde, spec


def cmd_audit(args, cfg):
    ds = _dataset(args, cfg)
    m, _ = _announced(args, cfg, ds)
    groups = partition_by_qid(ds)
    rep = confidence_report(groups, m)
    pub = ds.schema.public_names
    out = {"global_max": rep.global_max, "groups": []}
    for g, gmax, table in zip(groups, rep.group_max, rep.table):
        conf = {}
        for a in (0, 1):
            conf[str(a)] = [None if np.isnan(v) else float(v) for v in table[a]]
        out["groups"].append({"qid": dict(zip(pub, g.qid)), "members": list(g.labels),
                              "max_confidence": gmax, "confidence": conf})
    out["metadata"] = {"undefined": "null marks an outcome that never occurs in the group", **_meta(args)}
    _emit(args, dumps(out))
    return EXIT_OK


def cmd_fairness(args, cfg):
    ds = _dataset(args, cfg)
    m, spec = _announced(args, cfg, ds)
    conditions = []
    for c in args.condition or []:
        if "=" in c:
            k, v = c.split("=", 1)
            conditions.append((k.strip(), v.strip()))
        else:
            conditions.append(c.strip())
    measures = tuple(s.strip() for s in args.measures.split(",") if s.strip())
    rep = fairness_report(ds, ds.d, m, spec, args.group_by, conditions, measures, p=args.p)
    body = rep.to_dict()
    # the part a reader of the published report sees: announced rates and CSP biases
    published = {"group_by": args.group_by, "rates": rep.rates_announced}
    csp = [mobj for mobj in rep.measures if mobj.name == "csp"]
    attrs = {next(iter(mobj.condition)) for mobj in csp}
    if len(rep.rates_announced) == 2 and len(attrs) == 1:
        attr = attrs.pop()
        published["condition"] = attr
        published["csp"] = {mobj.condition[attr]: mobj.value_announced for mobj in csp}
    body["published"] = published
    _emit(args, dumps({"fairness": body, "metadata": _meta(args)}))
    return EXIT_OK


def _side(args, ds):
    if args.side:
        return SideInformation.from_csv(args.side, ds.schema.public_names, ds.schema.sensitive_names)
    return SideInformation.from_dataset(ds)


def _parse_assignments(text):
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise CliError(f"expected attr=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_attack(args, cfg):
    ds = _dataset(args, cfg)
    side = _side(args, ds)
    if args.attack_cmd == "posterior":
        m, _ = _announced(args, cfg, ds)
        rules = rules_from_mapping(ds, m)
        target = _parse_assignments(args.target)
        public = tuple(target[n] for n in ds.schema.public_names)
        res = posterior_attack(side, rules, public, args.outcome)
        rows = []
        for s, post in res.posterior.items():
            rows.append({"sensitive": dict(zip(ds.schema.sensitive_names, s)), "prior": res.prior[s],
                         "posterior": post, "amplification": res.amplification(s)})
        out = {"public": dict(zip(ds.schema.public_names, public)), "outcome": args.outcome,
               "targets": rows, "max_posterior": res.max_posterior}
        _emit(args, dumps(out))
        return EXIT_OK

    published = _read_json(args.report)
    published = published.get("fairness", published).get("published", published)
    if "csp" not in published:
        raise CliError("report has no published CSP biases for a single condition attribute")
    group_attr = published["group_by"]
    cond_attr = published["condition"]
    cell, value = args.known_cell.rsplit("=", 1)
    kg, kc = (s.strip() for s in cell.split(",", 1))
    inv = report_from_published(published, side, group_attr, cond_attr, kg, kc, float(value))
    res = fairness_inversion(inv, slack=args.slack)
    rules = {}
    for g, vals in res.final.items():
        for c, v in zip(inv.conditions, vals):
            rules[((g,), (c,))] = v
    out = {
        "conditions": list(inv.conditions),
        "branch": res.branch,
        "intermediate": res.intermediate,
        "clamped": res.clamped,
        "final": res.final,
        "rejected": {str(k): v for k, v in res.rejected.items()},
    }
    if ds.schema.public_names == (group_attr,) and ds.schema.sensitive_names == (cond_attr,):
        out["max_posterior"] = max_posterior(side, rules)
    _emit(args, dumps(out))
    return EXIT_OK


def cmd_verify(args, cfg):
    ds = _dataset(args, cfg)
    spec = _spec(args, cfg)
    if spec is None:
        raise CliError("no fidelity given")
    bounds = bounds_for(spec, ds.d)
    sol = solve_master(ds, spec, jobs=args.jobs, bounds=bounds)
    grid = GridSpec(step=args.step)
    rows, ok = [], True
    for g, gs in zip(sol.groups, sol.solutions):
        qid = "/".join(g.qid)
        try:
            res = grid_oracle(g, bounds, grid)
        except TooLarge as exc:
            print(f"skipping group {qid}: {exc}", file=sys.stderr)
            rows.append({"qid": qid, "beta_closed": gs.beta_star, "skipped": True})
            continue
        gap = res.beta_grid - gs.beta_star
        within = abs(gap) <= args.tol
        ok &= within
        rows.append({"qid": qid, "beta_closed": gs.beta_star, "beta_grid": res.beta_grid,
                     "gap": gap, "gap_bound": res.gap_bound, "within_tol": within})
    _emit(args, dumps({"tolerance": args.tol, "step": args.step, "groups": rows, "metadata": _meta(args)}))
    return EXIT_OK if ok else EXIT_GAP


def _common(parser, suppress):
    """Global flags; subcommands repeat them so they may follow the command name."""
    defaults = {"data": None, "config": None, "out": None, "jobs": os.cpu_count() or 1, "seed": 0}

    def dflt(name):
        return argparse.SUPPRESS if suppress else defaults[name]

    parser.add_argument("--data", default=dflt("data"), help="dataset CSV")
    parser.add_argument("--config", default=dflt("config"), help="JSON config (schema roles, fidelity)")
    parser.add_argument("--out", default=dflt("out"), help="output file (default: stdout)")
    parser.add_argument("--jobs", type=int, default=dflt("jobs"), help="worker threads for group solves")
    parser.add_argument("--seed", type=int, default=dflt("seed"), help="recorded in report metadata")


def _fidelity_flags(parser):
    grp = parser.add_mutually_exclusive_group()
    grp.add_argument("--delta", type=float)
    grp.add_argument("--alpha", type=float)


def build_parser():
    ap = argparse.ArgumentParser(prog="atrp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    _common(ap, suppress=False)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("solve", help="optimal announced rule for every QID group")
    _common(p, True)
    _fidelity_flags(p)

    p = sub.add_parser("tradeoff", help="beta* across an even fidelity grid, as CSV")
    _common(p, True)
    p.add_argument("--kind", choices=("delta", "alpha"), default="delta")
    p.add_argument("--steps", type=int, default=101)

    p = sub.add_parser("audit", help="adversary confidence for an announced rule")
    _common(p, True)
    _fidelity_flags(p)
    p.add_argument("--report", help="solve report whose announced rule is audited")

    p = sub.add_parser("fairness", help="fairness measures on true and announced rules")
    _common(p, True)
    _fidelity_flags(p)
    p.add_argument("--report", help="solve report holding the announced rule")
    p.add_argument("--group-by", required=True)
    p.add_argument("--condition", action="append", help="attr or attr=value; repeatable")
    p.add_argument("--measures", default="sp,csp,pr")
    p.add_argument("--p", type=float, default=0.8, help="p%%-rule threshold")

    p = sub.add_parser("attack", help="inference attacks")
    asub = p.add_subparsers(dest="attack_cmd", required=True)
    q = asub.add_parser("posterior", help="posterior over sensitive values for one target")
    _common(q, True)
    _fidelity_flags(q)
    q.add_argument("--target", required=True, help="public values, e.g. gender=M")
    q.add_argument("--outcome", type=int, choices=(0, 1), default=1)
    q.add_argument("--report", help="solve report holding the published rule")
    q.add_argument("--side", help="side-information CSV")
    q = asub.add_parser("invert", help="recover rules from a published fairness report")
    _common(q, True)
    q.add_argument("--report", required=True, help="fairness JSON")
    q.add_argument("--known-cell", required=True, help="group,condition=value")
    q.add_argument("--side", help="side-information CSV")
    q.add_argument("--slack", type=float, default=0.1)

    p = sub.add_parser("verify", help="compare closed form with the grid oracle")
    _common(p, True)
    _fidelity_flags(p)
    p.add_argument("--step", type=float, default=0.005)
    p.add_argument("--tol", type=float, default=0.01)
    return ap


COMMANDS = {
    "solve": cmd_solve,
    "tradeoff": cmd_tradeoff,
    "audit": cmd_audit,
    "fairness": cmd_fairness,
    "attack": cmd_attack,
    "verify": cmd_verify,
}


def _infeasible(exc) -> bool:
    if isinstance(exc, EmptyBounds):
        return True
    if isinstance(exc, GroupSolveError):
        return any(isinstance(e, EmptyBounds) for e in exc.failures.values())
    return False


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("ATRP_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return COMMANDS[args.cmd](args, cfg)
    except (AtrpError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE if _infeasible(exc) else EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
