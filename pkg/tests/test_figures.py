import numpy as np
import pytest

from fidbound.figures import (
    F_COMPOSITE,
    SCATTER_COLUMNS,
    figure_irb,
    figure_scatter,
    irb_channels,
    operating_widths,
    rows_to_csv,
)
from fidbound.metrics import coherence_angle, fidelity, unitarity


def test_irb_channels_hit_fidelities():
    c = irb_channels()
    assert fidelity(c.reference) == pytest.approx(0.9975, abs=1e-12)
    assert fidelity(c.coherent) == pytest.approx(0.9991, abs=1e-12)
    assert fidelity(c.coherent @ c.reference) == pytest.approx(F_COMPOSITE, abs=1e-12)
    assert fidelity(c.stochastic @ c.reference) == pytest.approx(F_COMPOSITE, abs=1e-12)
    assert fidelity(c.stochastic_literal) == pytest.approx(0.9975, abs=1e-12)
    assert coherence_angle(c.reference) > 0.01


def test_irb_exact_fits():
    rows, summary = figure_irb(lengths=range(1, 51), method="exact")
    target = summary["target_p_composite"]
    for name in ("coherent", "stochastic"):
        assert summary["fits"][name]["p"] == pytest.approx(target, abs=1e-6)
    assert len(rows) == 150


def test_irb_noiseless():
    rows, summary = figure_irb(lengths=(1, 2, 4), n_seqs=3, noiseless=True)
    assert all(r[2] == 1.0 for r in rows)
    assert summary["fits"]["reference"] is None


def test_operating_widths():
    a = operating_widths(1.0)
    assert a["width_F"] == pytest.approx(a["naive_width_r"], rel=0.1)
    assert a["chi00_route_width_r"] == pytest.approx(a["naive_width_r"], rel=0.1)
    p = 2 * 0.9975 - 1
    assert operating_widths(p * p)["width_F"] == pytest.approx(0, abs=1e-12)
    ws = [operating_widths(u)["width_F"] for u in (1.0, 0.993, 0.9903, 0.99003)]
    assert all(np.diff(ws) < 0)


def test_scatter_small():
    rows, summary = figure_scatter(n_per_panel=20, seed=4)
    assert len(rows) == 80 and len(rows[0]) == len(SCATTER_COLUMNS)
    for u, f_comp, f_gate, u_gate, lo, hi in rows:
        assert lo - 1e-12 <= f_gate <= hi + 1e-12
    assert all(p["violations"] == 0 for p in summary["panels"])
    again, _ = figure_scatter(n_per_panel=20, seed=4)
    assert rows == again


def test_scatter_reference_targets():
    rows, _ = figure_scatter(n_per_panel=3, seed=0, unitarities=(0.995,))
    assert {r[0] for r in rows} == {0.995}


def test_rows_to_csv():
    text = rows_to_csv(("a", "b"), [(1, 0.1), ("x", np.float64(2.5))])
    assert text == "a,b\n1,0.1\nx,2.5\n"


def test_reference_unitarity_in_summary():
    _, summary = figure_irb(lengths=(1, 2, 3), method="exact")
    c = irb_channels()
    assert summary["channels"]["u_reference"] == pytest.approx(unitarity(c.reference))
