import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from atrp.errors import EmptyBounds, UnsupportedSpec
from atrp.fidelity import (
    FidelityBounds,
    FidelitySpec,
    bias_distortion_bound,
    bounds_for,
    bounds_from_alpha,
    bounds_from_delta,
)

probs = st.floats(0.0, 1.0, allow_subnormal=False)


def test_delta_examples():
    b = bounds_from_delta([0.0, 0.5, 1.0], 0.9)
    np.testing.assert_allclose(b.lo, [0.0, 0.4, 0.9], atol=1e-12)
    np.testing.assert_allclose(b.hi, [0.1, 0.6, 1.0], atol=1e-12)
    np.testing.assert_allclose(b.y_lo, 1 - b.hi)
    b = bounds_from_delta([0.3], 1.0)
    assert b.lo[0] == b.hi[0] == 0.3


def test_alpha_examples():
    b = bounds_from_alpha([0.5], 0.8)
    assert b.lo[0] == pytest.approx(0.4)
    assert b.hi[0] == pytest.approx(0.6)
    b = bounds_from_alpha([0.0, 1.0, 0.3], 0.5)
    assert (b.lo[:2] == [0.0, 1.0]).all() and (b.hi[:2] == [0.0, 1.0]).all()
    b = bounds_from_alpha([0.2, 0.7], 1.0)
    np.testing.assert_allclose(b.lo, [0.2, 0.7])
    np.testing.assert_allclose(b.hi, [0.2, 0.7])


def test_alpha_zero_unconstrained_except_pinned():
    b = bounds_from_alpha([0.0, 0.4, 1.0], 0.0)
    assert b.lo.tolist() == [0.0, 0.0, 1.0]
    assert b.hi.tolist() == [0.0, 1.0, 1.0]


def test_distortion_bound():
    assert bias_distortion_bound(FidelitySpec.delta(0.9)) == pytest.approx(0.2)
    assert bias_distortion_bound(FidelitySpec.delta(0.3)) == 1.0
    assert bias_distortion_bound(FidelitySpec.alpha(1.0)) == 0.0
    assert bias_distortion_bound(FidelitySpec.alpha(0.9)) == pytest.approx(-2 * math.log(0.9))
    with pytest.raises(UnsupportedSpec):
        bias_distortion_bound(FidelitySpec.explicit([0], [1]))


def test_explicit_and_empty():
    spec = FidelitySpec.from_config({"fidelity": {"type": "explicit", "bounds": [[0.1, 0.2], [0.0, 1.0]]}})
    b = bounds_for(spec, [0.15, 0.5])
    assert b.lo.tolist() == [0.1, 0.0]
    with pytest.raises(EmptyBounds):
        FidelityBounds(np.array([0.5]), np.array([0.4]))
    with pytest.raises(UnsupportedSpec):
        bounds_for(spec, [0.1])


@pytest.mark.parametrize("cfg", [{"type": "delta", "value": 1.2}, {"type": "gamma", "value": 0.5}, {"type": "delta"}])
def test_bad_specs(cfg):
    with pytest.raises(UnsupportedSpec):
        FidelitySpec.from_config(cfg)


def test_config_roundtrip():
    spec = FidelitySpec.from_config({"type": "alpha", "value": 0.8})
    assert FidelitySpec.from_config(spec.to_dict()) == spec


@given(st.lists(probs, min_size=1, max_size=8), probs)
def test_delta_within_distance(d, delta):
    b = bounds_from_delta(d, delta)
    d = np.array(d)
    assert ((b.lo <= d) & (d <= b.hi)).all()
    assert ((b.lo >= 0) & (b.hi <= 1)).all()
    for x in (b.lo, b.hi, (b.lo + b.hi) / 2):
        assert (np.abs(x - d) <= 1 - delta + 1e-12).all()


@given(st.lists(probs, min_size=1, max_size=8))
def test_delta_endpoints(d):
    b = bounds_from_delta(d, 1.0)
    np.testing.assert_array_equal(b.lo, d)
    b = bounds_from_delta(d, 0.0)
    assert (b.lo == 0).all() and (b.hi == 1).all()


@given(st.lists(probs, min_size=1, max_size=8), st.floats(0.01, 1.0))
def test_alpha_ratios_hold(d, alpha):
    b = bounds_from_alpha(d, alpha)
    d = np.array(d)
    # cross-multiplied so values of d near 0 or 1 stay well conditioned
    for x in (b.lo, b.hi):
        assert (x >= alpha * d - 1e-12).all()
        assert (alpha * x <= d + 1e-12).all()
        assert (1 - x >= alpha * (1 - d) - 1e-12).all()
        assert (alpha * (1 - x) <= 1 - d + 1e-12).all()


@given(probs, probs)
def test_bound_nonincreasing(a, b):
    lo, hi = sorted((a, b))
    assert bias_distortion_bound(FidelitySpec.delta(lo)) >= bias_distortion_bound(FidelitySpec.delta(hi))
    assert bias_distortion_bound(FidelitySpec.alpha(lo)) >= bias_distortion_bound(FidelitySpec.alpha(hi))
