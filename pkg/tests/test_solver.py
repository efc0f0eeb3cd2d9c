import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from atrp import QidGroup, bounds_from_alpha, bounds_from_delta, solve_group, solve_master, tradeoff_sweep
from atrp import solver as solver_mod
from atrp.errors import GroupSolveError
from atrp.fidelity import FidelitySpec
from atrp.oracle import grid_oracle
from atrp.privacy import beta_min, c_star, check_beta, group_max_confidence
from atrp.solver import BETA0, BETAP, SINGLETON, compute_betas, compute_workspace

from conftest import DELTAS, groups, random_group
from reference import lp_optimum


def solve_delta(g, delta):
    return solve_group(g, bounds_from_delta(g.d, delta))


def test_toy6_female(toy6, toy6_groups):
    female, _ = toy6_groups
    b = bounds_from_delta(toy6.d, 0.9)
    b0, b1, bp = compute_betas(female, b)
    assert (b0, b1) == pytest.approx((0.6708, 0.6136), abs=1e-3)
    assert bp == pytest.approx(0.675, abs=1e-6)
    sol = solve_group(female, b)
    assert sol.case == BETAP
    np.testing.assert_allclose(sol.d_tilde, [0.1, 0.02, 0.9], atol=1e-6)
    assert sol.achieved_conf == pytest.approx(0.675, abs=1e-9)


def test_toy6_male(toy6, toy6_groups):
    _, male = toy6_groups
    sol = solve_group(male, bounds_from_delta(toy6.d, 0.9))
    assert sol.case == BETA0
    assert (sol.beta0, sol.beta1) == pytest.approx((0.6378, 0.4444), abs=1e-3)
    assert sol.beta_p == pytest.approx(0.585, abs=1e-6)
    np.testing.assert_allclose(sol.d_tilde, [0.1, 0.4, 0.9], atol=1e-6)


def test_toy6_workspace(toy6, toy6_groups):
    female, _ = toy6_groups
    ws = compute_workspace(female, bounds_from_delta(toy6.d, 0.9), 0.675)
    assert ws.anchor1 == 2 and ws.mass1 == pytest.approx(0.0675)
    assert ws.anchor0 == 0 and ws.mass0 == pytest.approx(0.27)
    assert female.p[0] * ws.x_max[0] == pytest.approx(0.03)


def test_anchor_tie_goes_to_first_member():
    g = QidGroup.from_arrays([0.25] * 4, [0.5] * 4)
    ws = compute_workspace(g, bounds_from_delta(g.d, 0.8), 0.5)
    assert ws.anchor1 == 0 and ws.anchor0 == 0


def test_master_toy6(toy6):
    sol = solve_master(toy6, FidelitySpec.delta(0.9))
    assert sol.beta_star == pytest.approx(0.675, abs=1e-9)
    np.testing.assert_allclose(sol.d_tilde, [0.1, 0.02, 0.9, 0.1, 0.4, 0.9], atol=1e-6)


def test_singleton_group():
    g = QidGroup.from_arrays([1.0], [0.3])
    sol = solve_delta(g, 0.0)
    assert sol.case == SINGLETON and sol.beta_star == 1.0


def test_master_matches_groups_any_order(toy6):
    rng = np.random.default_rng(11)
    from atrp.dataset import AttributeSchema, WeightedDataset

    schema = AttributeSchema(("q", "s"), ("public", "sensitive"), (tuple("abcde"), tuple("wxyz")))
    rows = [((q, s), int(rng.integers(1, 30)), float(rng.choice([0, 0.3, 1])))
            for q in "abcde" for s in "wxyz"]
    ds = WeightedDataset.from_rows(schema, rows)
    spec = FidelitySpec.delta(0.85)
    a = solve_master(ds, spec, jobs=1)
    b = solve_master(ds, spec, jobs=4)
    np.testing.assert_array_equal(a.d_tilde, b.d_tilde)
    # solving each group on its own, in reverse order, gives the same numbers
    bounds = bounds_from_delta(ds.d, 0.85)
    singles = {g.qid: solve_group(g, bounds).beta_star for g in reversed(a.groups)}
    assert a.beta_star == max(singles.values())
    assert [s.beta_star for s in a.solutions] == [singles[g.qid] for g in a.groups]


def test_group_errors_are_collected(toy6, monkeypatch):
    real = solver_mod.solve_group

    def flaky(g, b):
        if g.qid == ("M",):
            raise RuntimeError("boom")
        return real(g, b)

    monkeypatch.setattr(solver_mod, "solve_group", flaky)
    with pytest.raises(GroupSolveError) as info:
        solve_master(toy6, FidelitySpec.delta(0.9))
    assert list(info.value.failures) == [("M",)]
    assert "boom" in str(info.value)


def test_tradeoff_endpoints(toy6_groups):
    female, male = toy6_groups
    for g, lo, hi in ((female, 0.6, 1.0), (male, 0.45, 0.72)):
        curve = tradeoff_sweep(g, "delta", 101)
        assert curve[0].value == 0.0 and curve[-1].value == 1.0
        assert curve[0].beta_star == pytest.approx(lo, abs=1e-6)
        assert curve[-1].beta_star == pytest.approx(hi, abs=1e-6)
        vals = [c.beta_star for c in curve]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
    assert len(tradeoff_sweep(female, "delta", 2)) == 2
    with pytest.raises(ValueError):
        tradeoff_sweep(female, "delta", 1)


def test_alpha_sweep_endpoints(toy6_groups):
    _, male = toy6_groups
    curve = tradeoff_sweep(male, "alpha", 11)
    assert curve[-1].beta_star == pytest.approx(c_star(male))
    vals = [c.beta_star for c in curve]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_constant_rule_curve_is_flat():
    g = QidGroup.from_arrays([0.5, 0.3, 0.2], [0.4, 0.4, 0.4])
    assert {round(c.beta_star, 12) for c in tradeoff_sweep(g, "delta", 21)} == {0.5}


def test_zero_fidelity_reaches_prior_grid_check():
    rng = np.random.default_rng(3)
    for _ in range(30):
        g = random_group(rng, 2, 3)
        b = bounds_from_delta(g.d, 0.0)
        sol = solve_group(g, b)
        assert sol.beta_star == pytest.approx(beta_min(g), abs=1e-12)
        assert grid_oracle(g, b).beta_grid == pytest.approx(beta_min(g), abs=0.01)


def _check_solution(g, b, sol):
    lo, hi = b.lo, b.hi
    x = sol.d_tilde
    assert (x >= lo - 1e-9).all() and (x <= hi + 1e-9).all()
    assert group_max_confidence(g, x) <= sol.beta_star + 1e-9
    assert check_beta(g, x, sol.beta_star).ok
    assert beta_min(g) - 1e-12 <= sol.beta_star <= c_star(g) + 1e-9


@given(groups(), st.sampled_from(DELTAS))
def test_solution_valid(g, delta):
    b = bounds_from_delta(g.d, delta)
    sol = solve_group(g, b)
    _check_solution(g, b, sol)
    if g.size > 1:
        assert sol.beta_star == max(sol.beta0, sol.beta1, sol.beta_p, sol.beta_min)


@given(groups(), st.sampled_from((0.0, 0.2, 0.5, 0.8, 0.95, 1.0)))
def test_solution_valid_alpha(g, alpha):
    b = bounds_from_alpha(g.d, alpha)
    _check_solution(g, b, solve_group(g, b))


@given(groups(min_size=2))
def test_full_fidelity_returns_truth(g):
    sol = solve_delta(g, 1.0)
    np.testing.assert_array_equal(sol.d_tilde, g.d)
    assert sol.beta_star == pytest.approx(c_star(g), abs=1e-12)


@given(groups(min_size=2))
def test_no_fidelity_reaches_prior(g):
    assert solve_delta(g, 0.0).beta_star == pytest.approx(beta_min(g), abs=1e-12)


@given(groups(min_size=2), st.sampled_from(DELTAS))
def test_anchor_collapse(g, delta):
    b = bounds_from_delta(g.d, delta)
    sol = solve_group(g, b)
    ws = compute_workspace(g, b, sol.beta_star)
    assert (ws.b <= 1e-12).all()
    pi, th = ws.anchor1, ws.anchor0
    assert ws.x_min[pi] == pytest.approx(ws.x_max[pi], abs=1e-12)
    assert ws.x_min[pi] == pytest.approx(b.lo[pi], abs=1e-12)
    assert ws.y_min[th] == pytest.approx(ws.y_max[th], abs=1e-12)
    assert ws.y_min[th] == pytest.approx(b.y_lo[th], abs=1e-12)
    assert (ws.x_max <= b.hi + 1e-12).all() and (ws.x_min >= b.lo - 1e-12).all()


@given(groups(min_size=2), st.sampled_from(DELTAS))
def test_balance_equations(g, delta):
    b = bounds_from_delta(g.d, delta)
    sol = solve_group(g, b)
    if sol.case != BETAP:
        return
    ws = compute_workspace(g, b, sol.beta_p)
    x = sol.d_tilde
    assert np.dot(g.p, x) == pytest.approx(ws.mass1 / sol.beta_p, abs=1e-9)
    assert np.dot(g.p, 1 - x) == pytest.approx(ws.mass0 / sol.beta_p, abs=1e-9)


@given(groups(min_size=2, max_size=4))
def test_tradeoff_monotone(g):
    vals = [pt.beta_star for pt in tradeoff_sweep(g, "delta", 21)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_matches_lp_optimum():
    rng = np.random.default_rng(21)
    for _ in range(150):
        g = random_group(rng, 2, 6)
        delta = float(rng.choice(DELTAS[:-1]))
        b = bounds_from_delta(g.d, delta)
        sol = solve_group(g, b)
        assert sol.beta_star == pytest.approx(lp_optimum(g.p, b.lo, b.hi), abs=1e-6)
