import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fidbound.bounds import (
    ANGLE_OK,
    ANGLE_VIOLATED,
    chi00_pair_bounds,
    chi00_seq_lower,
    composite_decay_bound,
    decay_pair_bounds,
    infidelity_growth_upper,
    interleaved_chi00_bounds,
    interleaved_decay_bounds,
    interleaved_uncertainty_naive,
    intermediate_regime_upper,
    interval_to_metric,
    naive_group_bound,
)
from fidbound.channels import compose_seq
from fidbound.metrics import (
    Metric,
    MetricKind,
    chi00,
    coherence_angle,
    convert,
    decay_rate,
    fidelity,
    infidelity,
    unitarity,
)
from fidbound.zoo import (
    depolarizing,
    mix,
    phase_unitary,
    random_cptp,
    rotation_damping_qubit,
    unitary_channel,
    z_rotation,
)

c2 = lambda x: np.cos(x) ** 2
unit = st.floats(0, 1)


def test_pair_noiseless():
    iv = chi00_pair_bounds(1, 1)
    assert (iv.lower, iv.upper) == (1, 1)
    assert iv.assumptions == (ANGLE_OK,)


def test_pair_phase_unitaries():
    iv = chi00_pair_bounds(c2(0.3), c2(0.5))
    assert iv.lower == pytest.approx(c2(0.8), abs=1e-15)
    assert iv.upper == pytest.approx(c2(0.2), abs=1e-15)
    assert iv.upper == pytest.approx(0.960531, abs=1e-6)
    comp = chi00(phase_unitary(0.3) @ phase_unitary(0.5))
    assert comp == pytest.approx(iv.lower, abs=1e-12)


def test_pair_half_half():
    iv = chi00_pair_bounds(0.5, 0.5)
    assert iv.lower == pytest.approx(0, abs=1e-15)
    assert iv.upper == pytest.approx(1, abs=1e-15)


def counterexample_pair(a=1.0, w=0.8):
    """X = U(a) and Y a mix of U(pi/2 - a) with a bit flip: chi00(XY) = 0
    while the angles of X and Y sum past pi/2."""
    x = phase_unitary(a)
    y = mix([phase_unitary(np.pi / 2 - a), unitary_channel(np.array([[0, 1], [1, 0]]))], [w, 1 - w])
    return x, y


def test_pair_large_angles_drop_lower_end():
    x, y = counterexample_pair()
    cx, cy = chi00(x), chi00(y)
    a, b = np.arccos(np.sqrt(cx)), np.arccos(np.sqrt(cy))
    assert a + b > np.pi / 2
    assert chi00(x @ y) == pytest.approx(0, abs=1e-15)
    # cos^2(a + b) would wrongly exclude the composite
    assert c2(a + b) > 0.01
    iv = chi00_pair_bounds(cx, cy)
    assert iv.lower == 0 and ANGLE_VIOLATED in iv.assumptions
    assert iv.contains(chi00(x @ y), 1e-15)


def test_pair_rejects_out_of_range():
    with pytest.raises(ValueError):
        chi00_pair_bounds(1.2, 0.5)


@given(unit, unit)
def test_pair_symmetric_and_ordered(x, y):
    a, b = chi00_pair_bounds(x, y), chi00_pair_bounds(y, x)
    assert a.lower == pytest.approx(b.lower, abs=1e-14)
    assert a.upper == pytest.approx(b.upper, abs=1e-14)
    assert 0 <= a.lower <= a.upper <= 1


def test_pair_width_monotone():
    # width shrinks as either input heads to 0 or 1 with the other at 1
    xs = np.linspace(0, 1, 101)
    widths = [chi00_pair_bounds(x, 1.0).width for x in xs]
    assert max(widths) == 0
    for y in (0.3, 0.7):
        up = [chi00_pair_bounds(x, y).width for x in np.linspace(0.5, 1, 50)]
        assert np.all(np.diff(up) <= 1e-15)


@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_pair_contains_weak_random_pairs(seed, d):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0, 0.1, 2)
    x = depolarizing(1.0, d).liouville * (1 - w[0]) + w[0] * random_cptp(d, seed=rng).liouville
    y = depolarizing(1.0, d).liouville * (1 - w[1]) + w[1] * random_cptp(d, seed=rng).liouville
    cx, cy = np.trace(x) / d**2, np.trace(y) / d**2
    iv = chi00_pair_bounds(cx, cy)
    assert iv.contains(np.trace(x @ y) / d**2, 1e-9)


def test_seq_single():
    iv = chi00_seq_lower([0.9])
    assert iv.lower == pytest.approx(0.9) and iv.upper == 1


def test_seq_phase_unitaries_attain():
    iv = chi00_seq_lower([c2(0.2), c2(0.3), c2(0.4)])
    assert iv.lower == pytest.approx(0.386399, abs=1e-6)
    comp = compose_seq([phase_unitary(t) for t in (0.2, 0.3, 0.4)])
    assert chi00(comp) == pytest.approx(iv.lower, abs=1e-12)


def test_seq_condition_violated():
    iv = chi00_seq_lower([c2(0.6)] * 3)
    assert iv.lower == 0 and ANGLE_VIOLATED in iv.assumptions
    with pytest.raises(ValueError):
        chi00_seq_lower([])


def test_growth_examples():
    assert infidelity_growth_upper(0.0, 7, 2).bound == pytest.approx(0, abs=1e-15)
    assert infidelity_growth_upper(0.0025, 1, 2).bound == pytest.approx(0.0025, abs=1e-15)
    g = infidelity_growth_upper(0.001, 2, 2)
    assert g.leading_order == pytest.approx(0.004)
    assert g.bound == pytest.approx(0.004, rel=2e-3)


def test_growth_attained_by_rotations():
    r = 0.001
    chi = convert(r, MetricKind(Metric.R, 2), MetricKind(Metric.CHI00, 2))
    u = phase_unitary(np.arccos(np.sqrt(chi)))
    assert infidelity(u) == pytest.approx(r, abs=1e-12)
    m = 5
    assert infidelity(compose_seq([u] * m)) == pytest.approx(
        infidelity_growth_upper(r, m, 2).bound, abs=1e-12
    )


def test_growth_errors_and_flag():
    with pytest.raises(ValueError):
        infidelity_growth_upper(0.01, 0, 2)
    with pytest.raises(ValueError):
        infidelity_growth_upper(0.6, 2, 2)
    g = infidelity_growth_upper(0.3, 10, 2)
    assert ANGLE_VIOLATED in g.assumptions and g.bound == pytest.approx(2 / 3)


def test_decay_pair_depolarizing_collapses():
    iv = decay_pair_bounds(0.98, 0.98**2, 0.95, 0.95**2)
    assert iv.lower == pytest.approx(0.98 * 0.95, abs=1e-12)
    assert iv.width == pytest.approx(0, abs=1e-12)


def test_decay_pair_rotations():
    tx, ty = 0.4, 0.25
    px, py = [decay_rate(z_rotation(t)) for t in (tx, ty)]
    iv = decay_pair_bounds(px, 1, py, 1)
    ax, ay = np.arccos(px), np.arccos(py)
    assert iv.lower == pytest.approx(np.cos(ax + ay), abs=1e-12)
    # the fixed z axis keeps qubit rotations strictly inside
    assert iv.contains(decay_rate(z_rotation(tx) @ z_rotation(ty)), 1e-12)
    assert iv.contains(decay_rate(z_rotation(tx) @ z_rotation(-ty)), 1e-12)


def test_decay_pair_invalid():
    with pytest.raises(ValueError):
        decay_pair_bounds(0.9, 0.5, 0.9, 0.9)
    with pytest.raises(ValueError):
        decay_pair_bounds(0.0, 0.0, 0.9, 0.9)


def test_composite_decay_examples():
    b = composite_decay_bound(0.98, 0.98**2, 6, 2)
    assert b.halfwidth == pytest.approx(0, abs=1e-12)
    assert composite_decay_bound(0.9, 0.85, 1, 4).halfwidth == 0
    b = composite_decay_bound(0.9, 0.85, 4, 4)
    assert b.sigma == pytest.approx(np.sqrt(2))
    assert b.halfwidth_S <= b.halfwidth
    assert composite_decay_bound(0.9, 0.85, 4, 4, unital=True).sigma == 1


def test_intermediate_regime():
    assert intermediate_regime_upper(0.001, 0.0, 2, 10) == pytest.approx(0.01)
    assert intermediate_regime_upper(0.001, 0.02, 2, 10) == pytest.approx(0.019)
    r, d = 0.002, 2
    theta = np.sqrt(2 * d * r / (d - 1))
    assert intermediate_regime_upper(r, theta, d, 7) == pytest.approx(49 * r)


def test_intermediate_regime_against_composed_channels():
    ch = rotation_damping_qubit(0.9995, 0.9995, 0.02)
    m = 10
    r = infidelity(ch)
    exact = infidelity(compose_seq([ch] * m))
    lead = intermediate_regime_upper(r, coherence_angle(ch), 2, m)
    assert exact == pytest.approx(lead, rel=0.05)


def test_interleaved_chi00_examples():
    iv = interleaved_chi00_bounds(0.93, 1.0)
    assert iv.lower == pytest.approx(0.93) and iv.upper == pytest.approx(0.93)
    iv = interleaved_chi00_bounds(c2(0.8), c2(0.5))
    assert iv.lower == pytest.approx(c2(1.3), abs=1e-12)
    assert iv.upper == pytest.approx(c2(0.3), abs=1e-12)
    for h in (0.3, 1.3):
        comp = chi00(phase_unitary(h) @ phase_unitary(0.5 if h < 1 else -0.5))
        assert comp == pytest.approx(c2(0.8), abs=1e-12)


def test_interleaved_chi00_irb_width():
    f2, chi = MetricKind(Metric.F, 2), MetricKind(Metric.CHI00, 2)
    naive = interleaved_uncertainty_naive(0.0025)
    iv = interleaved_chi00_bounds(convert(0.996, f2, chi), convert(0.9975, f2, chi))
    width_r = interval_to_metric(iv, Metric.R, 2).width
    assert 0.5 * naive < width_r < 2 * naive
    # the 4 sqrt(2) r estimate is for a composite infidelity of exactly 2r
    iv = interleaved_chi00_bounds(convert(0.995, f2, chi), convert(0.9975, f2, chi))
    assert interval_to_metric(iv, Metric.R, 2).width == pytest.approx(naive, rel=0.01)


def test_naive_helpers():
    assert interleaved_uncertainty_naive(0) == 0
    assert interleaved_uncertainty_naive(0.0025) == pytest.approx(0.014142, abs=1e-6)
    assert naive_group_bound(0.0025, 12) == pytest.approx(0.03)
    assert naive_group_bound(0, 5) == 0
    with pytest.raises(ValueError):
        naive_group_bound(-1, 3)


def test_interleaved_decay_examples():
    iv = interleaved_decay_bounds(0.97, 0.99, 0.0)
    assert iv.width == pytest.approx(0, abs=1e-15)
    t = 0.05
    iv = interleaved_decay_bounds(np.sqrt(0.98), 0.98, t)
    assert iv.lower == pytest.approx(np.cos(t)) and iv.upper == pytest.approx(np.cos(t))
    # tiny overshoot past 1 clamps
    assert interleaved_decay_bounds(1.0 + 1e-16, 1.0, 0.1).width == pytest.approx(0, abs=1e-12)


def test_interleaved_decay_contains_rotation_gate():
    ref = depolarizing(0.99) @ z_rotation(0.05)
    for beta in (0.0, 0.03, -0.07):
        gate = z_rotation(beta)
        iv = interleaved_decay_bounds(decay_rate(gate @ ref), unitarity(ref), coherence_angle(ref))
        assert iv.contains(decay_rate(gate), 1e-12)


def test_interval_to_metric_orders_endpoints():
    iv = chi00_pair_bounds(c2(0.1), c2(0.2))
    r = interval_to_metric(iv, Metric.R, 2)
    assert r.lower <= r.upper and r.kind is Metric.R and r.dim == 2
    f = interval_to_metric(iv, Metric.F, 2)
    assert f.contains(fidelity(phase_unitary(0.1) @ phase_unitary(0.2)), 1e-12)


def test_as_dict():
    out = chi00_pair_bounds(0.9, 0.9).as_dict()
    assert set(out) == {"kind", "lower", "upper", "source", "assumptions"}
    assert out["kind"] == "chi00"
