"""Datasets for the interleaved-RB survival curves and the fidelity scatter.

Neither dataset renders anything; both return rows ready for CSV plus a
small summary dict.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .bounds import interleaved_chi00_bounds, interleaved_decay_bounds, interval_to_metric
from .channels import Channel
from .metrics import (
    Metric,
    MetricKind,
    coherence_angle,
    convert,
    decay_rate,
    fidelity,
    unitarity,
)
from .rb import DEFAULT_LENGTHS, DEFAULT_NSEQS, Interleave, run_rb, twodesign_12
from .zoo import (
    EnsembleSpec,
    depolarizing,
    identity,
    random_near_identity,
    random_with_targets,
    z_rotation,
)

F_REF = 0.9975
F_COMPOSITE = 0.9960
F_COHERENT_GATE = 0.9991
F_STOCHASTIC_GATE = 0.9975
SCATTER_UNITARITIES = (1.0, 0.993, 0.9903, 0.99003)

_P2 = MetricKind(Metric.P, 2)
_F2 = MetricKind(Metric.F, 2)


def _p(f: float) -> float:
    return convert(f, _F2, _P2)


@dataclass(frozen=True)
class IRBChannels:
    """Noise channels for the two interleaved scenarios.

    ``reference`` is a depolarizing channel after a z-rotation by ``alpha``.
    The coherent gate error is a further z-rotation by ``beta``; the
    stochastic one is depolarizing with parameter ``s``.
    """

    reference: Channel
    coherent: Channel
    stochastic: Channel
    stochastic_literal: Channel
    alpha: float
    q: float
    beta: float
    s: float


def irb_channels() -> IRBChannels:
    p_ref, p_comp = _p(F_REF), _p(F_COMPOSITE)
    beta = float(np.arccos((3 * _p(F_COHERENT_GATE) - 1) / 2))

    def q_of(alpha):
        return 3 * p_ref / (1 + 2 * np.cos(alpha))

    # rotations add coherently, so p(E_h E) = q (1 + 2 cos(alpha + beta)) / 3
    alpha = brentq(lambda a: q_of(a) * (1 + 2 * np.cos(a + beta)) / 3 - p_comp, 0.0, 0.5, xtol=1e-16)
    q = q_of(alpha)
    ref = depolarizing(q) @ z_rotation(alpha)
    # a depolarizing gate error just rescales p
    s = p_comp / p_ref
    return IRBChannels(
        reference=ref,
        coherent=z_rotation(beta),
        stochastic=depolarizing(s),
        stochastic_literal=depolarizing(_p(F_STOCHASTIC_GATE)),
        alpha=float(alpha),
        q=float(q),
        beta=beta,
        s=float(s),
    )


IRB_SCENARIOS = ("reference", "coherent", "stochastic")


def figure_irb(lengths: Sequence[int] = DEFAULT_LENGTHS, n_seqs: int = DEFAULT_NSEQS, seed: int = 0,
               method: str = "sampled", noiseless: bool = False):
    """Survival curves for the reference run and both interleaved scenarios.

    Returns ``(rows, summary)`` with rows ``(scenario, m, p_surv, std_error)``.
    The interleaved gate is the pi z-rotation, which commutes with the
    z-symmetric reference error.
    """
    chans = irb_channels()
    gs = twodesign_12()
    h = gs.index_of(np.diag([1, -1]))
    if noiseless:
        gs = gs.with_noise(identity(2))
        gate_noise = {"coherent": identity(2), "stochastic": identity(2)}
    else:
        gs = gs.with_noise(chans.reference)
        gate_noise = {"coherent": chans.coherent, "stochastic": chans.stochastic}
    rows, fits = [], {}
    for name in IRB_SCENARIOS:
        inter = None if name == "reference" else Interleave(h, gate_noise[name])
        run = run_rb(gs, lengths, method, n_seqs, seed, inter, fit=len(lengths) >= 3 and not noiseless)
        rows.extend((name, m, p, se) for m, p, se in run.survival)
        fits[name] = None if run.fit is None else run.fit.as_dict()
    summary = {
        "fits": fits,
        "target_p_composite": _p(F_COMPOSITE),
        "channels": {
            "alpha": chans.alpha,
            "q": chans.q,
            "beta": chans.beta,
            "s": chans.s,
            "F_reference": fidelity(chans.reference),
            "u_reference": unitarity(chans.reference),
            "F_coherent_gate": fidelity(chans.coherent),
            "F_stochastic_gate": fidelity(chans.stochastic),
            "F_composite_coherent": fidelity(chans.coherent @ chans.reference),
            "F_composite_stochastic": fidelity(chans.stochastic @ chans.reference),
            "F_composite_stochastic_literal": fidelity(chans.stochastic_literal @ chans.reference),
        },
        "seed": seed,
        "n_seqs": n_seqs,
        "method": method,
    }
    return rows, summary


# -- scatter ---------------------------------------------------------------

SCATTER_COLUMNS = ("u_ref", "F_composite", "F_individual", "u_individual", "bound_lower", "bound_upper")


def _random_gate_error(rng: np.random.Generator) -> Channel:
    # half with prescribed fidelity (any unitarity), half generic weak noise
    if rng.uniform() < 0.5:
        f = rng.uniform(0.995, 0.9995)
        return random_with_targets(EnsembleSpec(target_fidelity=f, seed=rng))
    return random_near_identity(2, scale=0.08, seed=rng)


def scatter_interval(p_composite: float, ref: Channel):
    """Fidelity interval for the gate error given the composite decay rate."""
    iv = interleaved_decay_bounds(p_composite, unitarity(ref), coherence_angle(ref))
    return interval_to_metric(iv, Metric.F, 2)


def operating_widths(u_ref: float, f_ref: float = F_REF) -> dict:
    """Interval widths at the composite infidelity ``2 r(E)``.

    That is where the chi00 route gives the ``4 sqrt(2) r`` width, so the
    two routes are compared at the same point.
    """
    p = _p(f_ref)
    theta = float(np.arccos(min(p / np.sqrt(u_ref), 1.0)))
    r = 1 - f_ref
    f_comp = 1 - 2 * r
    iv = interleaved_decay_bounds(_p(f_comp), u_ref, theta)
    iv_f = interval_to_metric(iv, Metric.F, 2)
    chi_kind = MetricKind(Metric.CHI00, 2)
    chi = interleaved_chi00_bounds(convert(f_comp, _F2, chi_kind), convert(f_ref, _F2, chi_kind))
    return {
        "u_ref": u_ref,
        "theta_ref": theta,
        "F_composite": f_comp,
        "width_F": iv_f.width,
        "chi00_route_width_r": interval_to_metric(chi, Metric.R, 2).width,
        "naive_width_r": 4 * np.sqrt(2) * r,
    }


def figure_scatter(n_per_panel: int = 1000, seed: int = 0,
                   unitarities: Sequence[float] = SCATTER_UNITARITIES):
    """Random (gate error, reference error) pairs for each reference unitarity.

    Returns ``(rows, summary)``; each row follows ``SCATTER_COLUMNS``. Each
    panel draws from its own stream keyed by ``(seed, panel index)``.
    """
    if n_per_panel < 1:
        raise ValueError("n_per_panel must be >= 1")
    rows, panels = [], []
    for k, u in enumerate(unitarities):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
        violations = 0
        for _ in range(n_per_panel):
            ref = random_with_targets(EnsembleSpec(target_fidelity=F_REF, target_unitarity=u, seed=rng))
            gate = _random_gate_error(rng)
            comp = gate @ ref
            iv = scatter_interval(decay_rate(comp), ref)
            f_gate = fidelity(gate)
            violations += not iv.contains(f_gate, 1e-12)
            rows.append((u, fidelity(comp), f_gate, unitarity(gate), iv.lower, iv.upper))
        panels.append({**operating_widths(u), "n": n_per_panel, "violations": violations})
    return rows, {"panels": panels, "seed": seed}


def rows_to_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()
