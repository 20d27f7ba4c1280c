from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import ortho_group

from fidbound.matrix_lab import (
    HypothesisError,
    RealMatrixStats,
    coherence_angle_real,
    geometric_sum_S,
    geometric_sum_direct,
    pair_trace_bounds,
    product_trace_bound,
    saturating_rotation,
    unital_block_sigma_check,
)
from fidbound.zoo import identity, random_cptp, random_unital

finite = st.floats(-10, 10, allow_nan=False)


def rot(a):
    return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])


def test_angle_examples():
    assert coherence_angle_real(np.eye(4)) == 0
    for a in (0.1, 1.0, 3.0):
        assert coherence_angle_real(rot(a)) == pytest.approx(a, abs=1e-12)
    assert coherence_angle_real(-np.eye(3)) == pytest.approx(np.pi)


def test_angle_errors():
    with pytest.raises(ValueError):
        coherence_angle_real(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        coherence_angle_real(np.ones((2, 3)))


@given(arrays(float, (3, 3), elements=finite))
def test_traceless_part_identity(m):
    if np.linalg.norm(m) < 1e-3:
        return
    t = coherence_angle_real(m)
    lhs = np.linalg.norm(m - np.trace(m) / 3 * np.eye(3))
    assert lhs == pytest.approx(np.linalg.norm(m) * np.sin(t), abs=1e-12 * max(1, np.linalg.norm(m)))
    assert abs(np.trace(m)) <= np.sqrt(3) * np.linalg.norm(m) + 1e-12


def test_stats():
    s = RealMatrixStats.from_matrix(2 * np.eye(2))
    assert (s.dim, s.trace, s.coherence_angle, s.max_singular_value) == (2, 4, 0, 2)
    assert s.frobenius_norm == pytest.approx(np.sqrt(8))


def test_pair_examples():
    assert pair_trace_bounds(np.eye(3), np.eye(3)) == pytest.approx((1, 1, 1))
    a, b = 0.4, 0.9
    for d in (2, 4, 6):
        lo, val, hi = pair_trace_bounds(np.kron(rot(a), np.eye(d // 2)), np.kron(rot(b), np.eye(d // 2)))
        assert val == pytest.approx(lo, abs=1e-12)
        lo, val, hi = pair_trace_bounds(np.kron(rot(a), np.eye(d // 2)), np.kron(rot(-b), np.eye(d // 2)))
        assert val == pytest.approx(hi, abs=1e-12)
    with pytest.raises(ValueError):
        pair_trace_bounds(np.eye(2), np.eye(3))


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_pair_bounds_random(d, seed):
    rng = np.random.default_rng(seed)
    lo, val, hi = pair_trace_bounds(rng.standard_normal((d, d)), rng.standard_normal((d, d)))
    assert lo - 1e-9 <= val <= hi + 1e-9


def test_saturating_rotation():
    assert np.allclose(saturating_rotation(2, 0.0, 4), np.eye(4))
    assert np.allclose(saturating_rotation(np.sqrt(2), 0, 2), np.eye(2))
    m = saturating_rotation(2, 0.7, 4)
    assert coherence_angle_real(m) == pytest.approx(0.7, abs=1e-12)
    assert np.linalg.norm(m) == pytest.approx(2)
    lo, val, hi = pair_trace_bounds(m, saturating_rotation(1.3, 0.2, 4))
    assert val == pytest.approx(lo, abs=1e-12)
    lo, val, hi = pair_trace_bounds(m, saturating_rotation(1.3, -0.2, 4))
    assert val == pytest.approx(hi, abs=1e-12)
    with pytest.raises(ValueError):
        saturating_rotation(1, 0.1, 3)
    with pytest.raises(ValueError):
        saturating_rotation(0, 0.1, 2)


def test_geometric_sum_examples():
    assert geometric_sum_S(1.0, 4) == 6
    assert geometric_sum_S(0.5, 3) == pytest.approx(2, abs=1e-15)
    assert geometric_sum_S(0.3, 1) == 0
    with pytest.raises(ValueError):
        geometric_sum_S(0.5, 0)


def exact_S(p, m):
    p = Fraction(p)
    return float(sum(i * p ** (i - 1) for i in range(1, m)))


def test_geometric_sum_against_direct():
    for p in np.linspace(0, 0.999, 200):
        for m in range(1, 51):
            want = exact_S(p, m)
            for got in (geometric_sum_S(p, m), geometric_sum_direct(p, m)):
                assert abs(got - want) <= 1e-12 * want


def test_geometric_sum_near_one():
    for m in (2, 10, 50):
        assert geometric_sum_S(1.0, m) == comb(m, 2)
        # S(1 - e, m) = C(m, 2) - e (m-2)(m-1)m/3 + O(e^2)
        gap = 1e-8 * (m - 2) * (m - 1) * m / 3
        assert geometric_sum_S(1 - 1e-8, m) == pytest.approx(comb(m, 2) - gap, abs=1e-9)
    for m in (2, 10, 30):
        assert abs(geometric_sum_S(1 - 1e-8, m) - comb(m, 2)) <= 1e-4


def test_product_bound_scalar_family():
    r = product_trace_bound([0.9 * np.eye(3)] * 5, 1.0)
    assert r.deviation == pytest.approx(0, abs=1e-15)
    assert r.theta == 0


def test_product_bound_rotations():
    d, u, theta = 4, 0.98, 0.1
    m = saturating_rotation(np.sqrt(d * u), theta, d)
    for k in (2, 4, 8):
        r = product_trace_bound([m] * k, 1.0)
        closed = u ** (k / 2) * abs(np.cos(k * theta) - np.cos(theta) ** k)
        assert r.deviation == pytest.approx(closed, abs=1e-14)
        assert r.holds and r.bound_S <= r.bound_binom * (1 + 1e-12)


def test_product_bound_orthogonal_conjugates():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        d = int(rng.integers(2, 5))
        k = int(rng.integers(2, 7))
        base = np.eye(d) + 0.3 * rng.standard_normal((d, d))
        base /= max(1.0, np.linalg.norm(base) / np.sqrt(d), np.trace(base) / d)
        os = ortho_group.rvs(d, size=k, random_state=rng)
        mats = [o @ base @ o.T for o in os]
        prefix, sig = np.eye(d), 1.0
        for mm in mats:
            prefix = prefix @ mm
            sig = max(sig, np.linalg.norm(prefix, 2))
        r = product_trace_bound(mats, sig)
        assert r.deviation <= r.bound_S + 1e-9


def test_product_bound_hypotheses():
    with pytest.raises(HypothesisError):
        product_trace_bound([], 1.0)
    with pytest.raises(HypothesisError) as err:
        product_trace_bound([0.9 * np.eye(2), 0.8 * np.eye(2)], 1.0)
    assert err.value.index == 1
    with pytest.raises(HypothesisError):
        product_trace_bound([0.9 * np.eye(2)], 0.5)
    with pytest.raises(HypothesisError):
        product_trace_bound([np.diag([1.5, 0.1])] * 2, 1.0)
    with pytest.raises(HypothesisError):
        product_trace_bound([1.2 * np.eye(2)], 2.0)


def test_sigma_checks():
    r = unital_block_sigma_check(identity(3))
    assert r.sigma_max == pytest.approx(1) and r.within_unital
    for s in range(1000):
        assert unital_block_sigma_check(random_cptp(2, seed=s)).within_general
    for s in range(200):
        r = unital_block_sigma_check(random_unital(4, seed=s))
        assert r.is_unital and r.within_unital
