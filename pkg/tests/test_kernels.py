import numpy as np
import pytest

from atrp import kernels
from atrp._accel import HAVE_NUMBA, requested_backend

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@pytest.fixture(scope="module")
def backends():
    return kernels.get("numba"), kernels.get("numpy")


def test_backend_env(monkeypatch):
    monkeypatch.setenv("ATRP_BACKEND", "numpy")
    assert requested_backend() == "numpy"
    monkeypatch.setenv("ATRP_BACKEND", "bogus")
    with pytest.raises(ValueError):
        requested_backend()
    monkeypatch.delenv("ATRP_BACKEND")
    assert requested_backend() == "numba"


@pytest.mark.parametrize("seed", range(20))
def test_parity(backends, seed):
    nb, npb = backends
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 40))
    p = rng.random(m) + 0.01
    lo = rng.random(m) * 0.5
    hi = np.minimum(1.0, lo + rng.random(m) * 0.5)
    cap = float(rng.random() * 0.3)
    assert nb.anchor(p, lo) == npb.anchor(p, lo)
    np.testing.assert_allclose(nb.capped_masses(p, hi, cap), npb.capped_masses(p, hi, cap), rtol=1e-12)
    assert nb.capped_sum(p, hi, cap, 0) == pytest.approx(npb.capped_sum(p, hi, cap, 0), rel=1e-12)
    target = float(rng.random() * (p * hi).sum())
    a, ra = nb.greedy_fill(p * lo, p * hi, target)
    b, rb = npb.greedy_fill(p * lo, p * hi, target)
    np.testing.assert_allclose(a, b, atol=1e-12)
    assert ra == pytest.approx(rb, abs=1e-12)
    assert nb.max_confidence(p, lo) == pytest.approx(npb.max_confidence(p, lo), rel=1e-12)
    t = float(rng.random())
    assert nb.floor_score(p, lo, hi, 0, t) == pytest.approx(npb.floor_score(p, lo, hi, 0, t), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_grid_parity(backends, seed):
    nb, npb = backends
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 4))
    axes = [np.unique(np.round(rng.random(int(rng.integers(2, 12))), 3)) for _ in range(m)]
    flat = np.concatenate(axes)
    lens = np.array([a.size for a in axes], dtype=np.int64)
    p = rng.random(m) + 0.05
    b1, i1 = nb.grid_search(flat, lens, p)
    b2, i2 = npb.grid_search(flat, lens, p)
    assert b1 == pytest.approx(b2, rel=1e-12)
    assert list(i1) == list(i2)
    for beta in (b1 - 1e-6, b1 + 1e-6):
        assert nb.grid_feasible(flat, lens, p, beta, 1e-12) == npb.grid_feasible(flat, lens, p, beta, 1e-12)


@pytest.mark.parametrize("family", [0, 1])
def test_pairwise_parity(backends, family):
    nb, npb = backends
    rng = np.random.default_rng(4)
    d = rng.choice([0.0, 0.2, 0.5, 1.0], 30)
    codes = rng.integers(0, 3, (30, 3))
    a = nb.pairwise_violation(d, codes, 0.05, family)
    b = npb.pairwise_violation(d, codes, 0.05, family)
    assert a[0] == pytest.approx(b[0]) and a[1:] == b[1:]
