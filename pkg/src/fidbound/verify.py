"""Monte-Carlo soundness sweeps for the bounds and the real-matrix inequalities.

Each sweep returns a :class:`SweepResult` holding the smallest signed slack
seen (negative means the inequality failed). Every (sweep, dimension) pair
draws from its own stream derived from the master seed.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from math import comb
from typing import Callable, Sequence

import numpy as np

from .bounds import chi00_pair_bounds, chi00_seq_lower
from .channels import make_basis
from .matrix_lab import coherence_angle_batch, pair_trace_bounds_batch, saturating_rotation
from .zoo import random_cptp_liouville_batch, random_unitary_batch

DEFAULT_TOL = 1e-9


@dataclass
class SweepResult:
    inequality: str
    dim: int
    trials: int
    min_slack: float
    tol: float = DEFAULT_TOL

    @property
    def max_violation(self) -> float:
        return max(0.0, -self.min_slack)

    @property
    def ok(self) -> bool:
        return self.min_slack >= -self.tol

    def as_dict(self) -> dict:
        return {**asdict(self), "max_violation": self.max_violation, "ok": self.ok}


def _rng(seed: int, tag: int, d: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(tag, d)))


def _chi00(liou: np.ndarray) -> np.ndarray:
    # chi00 = tr(L)/d^2 for any trace-orthonormal basis
    return np.trace(liou, axis1=-2, axis2=-1) / liou.shape[-1]


def _blocks(liou: np.ndarray) -> np.ndarray:
    return liou[..., 1:, 1:]


def _p_u(liou: np.ndarray):
    b = _blocks(liou)
    n = b.shape[-1]
    return np.trace(b, axis1=-2, axis2=-1) / n, np.sum(b * b, axis=(-2, -1)) / n


def _unitary_liouville(us: np.ndarray) -> np.ndarray:
    d = us.shape[-1]
    t = make_basis(d).vec_matrix
    superop = np.einsum("nij,nab->niajb", us, us.conj()).reshape(len(us), d * d, d * d)
    return (t.conj().T @ superop @ t).real


def _pair_ensemble(d: int, n: int, rng: np.random.Generator):
    """Half generic random channels, half commuting unitaries (which sit on the
    bounds) lightly mixed with random channels so they straddle them."""
    k = n // 2
    x = random_cptp_liouville_batch(d, n - k, rng)
    y = random_cptp_liouville_batch(d, n - k, rng)
    if k == 0:
        return x, y
    v = random_unitary_batch(d, k, rng)

    def commuting():
        phases = np.exp(1j * rng.uniform(-np.pi / 2, np.pi / 2, size=(k, d)))
        us = np.einsum("nij,nj,nkj->nik", v, phases, v.conj())
        w = rng.uniform(0, 0.2, size=(k, 1, 1)) * (rng.uniform(size=(k, 1, 1)) < 0.5)
        return (1 - w) * _unitary_liouville(us) + w * random_cptp_liouville_batch(d, k, rng)

    return np.concatenate([x, commuting()]), np.concatenate([y, commuting()])


def sweep_chi00_pair(d: int, trials: int, seed: int = 0, shrink: float = 1.0) -> SweepResult:
    rng = _rng(seed, 1, d)
    x, y = _pair_ensemble(d, trials, rng)
    cx, cy, cxy = _chi00(x), _chi00(y), _chi00(x @ y)
    slack = np.inf
    for a, b, v in zip(cx, cy, cxy):
        iv = chi00_pair_bounds(float(np.clip(a, 0, 1)), float(np.clip(b, 0, 1)), shrink)
        slack = min(slack, v - iv.lower, iv.upper - v)
    return SweepResult("chi00_pair", d, trials, float(slack))


def sweep_chi00_seq(d: int, trials: int, seed: int = 0, max_len: int = 8) -> SweepResult:
    rng = _rng(seed, 2, d)
    slack = np.inf
    for _ in range(trials):
        m = int(rng.integers(2, max_len + 1))
        # mix of generic and weak noise so the angle condition is exercised both ways
        weak = rng.uniform() < 0.5
        chans = random_cptp_liouville_batch(d, m, rng)
        if weak:
            w = rng.uniform(0, 0.1, size=m)[:, None, None]
            chans = (1 - w) * np.eye(d * d) + w * chans
        chis = _chi00(chans)
        comp = np.linalg.multi_dot(list(chans)) if m > 1 else chans[0]
        iv = chi00_seq_lower([float(np.clip(c, 0, 1)) for c in chis])
        slack = min(slack, _chi00(comp) - iv.lower)
    return SweepResult("chi00_seq", d, trials, float(slack))


def sweep_unitarity_pair(d: int, trials: int, seed: int = 0) -> SweepResult:
    rng = _rng(seed, 3, d)
    x, y = _pair_ensemble(d, trials, rng)
    bx, by = _blocks(x), _blocks(y)
    lo, value, hi = pair_trace_bounds_batch(bx, by)
    # value = tr(B_x B_y)/(|B_x||B_y|) = p(XY) / sqrt(u_x u_y) because (XY)_u = B_x B_y
    slack = np.minimum(value - lo, hi - value)
    return SweepResult("unitarity_pair", d, trials, float(slack.min()))


def sweep_decay_fold(d: int, trials: int, seed: int = 0, max_len: int = 6, unital: bool = False
                     ) -> SweepResult:
    """Unitary conjugates of one channel share p and u; compare p(X_1...X_m) to p^m."""
    rng = _rng(seed, 5 if unital else 4, d)
    sigma = 1.0 if unital else np.sqrt(d / 2)
    slack = np.inf
    for _ in range(trials):
        m = int(rng.integers(2, max_len + 1))
        if unital:
            # mixed-unitary channels are unital
            w = rng.dirichlet(np.ones(3))
            base = np.einsum("k,kij->ij", w, _unitary_liouville(random_unitary_batch(d, 3, rng)))
        else:
            base = random_cptp_liouville_batch(d, 1, rng)[0]
        w = rng.uniform(0, 1) ** 2
        base = (1 - w) * np.eye(d * d) + w * base
        conj = _unitary_liouville(random_unitary_batch(d, m, rng))
        chans = conj @ base @ np.transpose(conj, (0, 2, 1))
        comp = np.linalg.multi_dot(list(chans))
        p, u = _p_u(base)
        theta = coherence_angle_batch(_blocks(base)[None])[0]
        pm = _p_u(comp)[0]
        bound = sigma * comb(m, 2) * u * np.sin(theta) ** 2
        slack = min(slack, bound - abs(pm - p ** m))
    name = "decay_fold_unital" if unital else "decay_fold"
    return SweepResult(name, d, trials, float(slack))


def sweep_sigma(d: int, trials: int, seed: int = 0, unital: bool = False) -> SweepResult:
    rng = _rng(seed, 7 if unital else 6, d)
    if unital:
        w = rng.dirichlet(np.ones(3), size=trials)
        us = _unitary_liouville(random_unitary_batch(d, 3 * trials, rng)).reshape(trials, 3, d * d, d * d)
        liou = np.einsum("nk,nkij->nij", w, us)
        limit = 1.0
    else:
        liou = random_cptp_liouville_batch(d, trials, rng)
        limit = np.sqrt(d / 2)
    sig = np.linalg.norm(_blocks(liou), ord=2, axis=(1, 2))
    return SweepResult("sigma_unital" if unital else "sigma_general", d, trials, float(np.min(limit - sig)))


def sweep_appendix_pair(d: int, trials: int, seed: int = 0, batch: int = 20_000) -> SweepResult:
    rng = _rng(seed, 8, d)
    slack = np.inf
    for start in range(0, trials, batch):
        n = min(batch, trials - start)
        a = rng.standard_normal((n, d, d))
        b = rng.standard_normal((n, d, d))
        lo, value, hi = pair_trace_bounds_batch(a, b)
        slack = min(slack, float(np.min(np.minimum(value - lo, hi - value))))
    return SweepResult("appendix_pair", d, trials, slack)


def saturation_real_error(d: int, n_grid: int = 20) -> float:
    """Largest gap between the saturating family's trace and the pair bounds."""
    if d % 2:
        raise ValueError("saturating family needs even d")
    worst = 0.0
    for norm in np.linspace(0.5, 3.0, 4):
        for a in np.linspace(0, np.pi / 2, n_grid):
            for b in np.linspace(0, np.pi / 2, n_grid):
                m1 = saturating_rotation(norm, a, d)
                lo, val, _ = pair_trace_bounds_batch(m1[None], saturating_rotation(norm, b, d)[None])
                _, val2, hi = pair_trace_bounds_batch(m1[None], saturating_rotation(norm, -b, d)[None])
                # the reversed rotation has angle b too
                worst = max(worst, abs(val[0] - lo[0]), abs(val2[0] - hi[0]))
    return float(worst)


BOUND_SWEEPS: dict[str, Callable[..., SweepResult]] = {
    "chi00_pair": sweep_chi00_pair,
    "chi00_seq": sweep_chi00_seq,
    "unitarity_pair": sweep_unitarity_pair,
    "decay_fold": sweep_decay_fold,
    "decay_fold_unital": lambda d, n, seed=0: sweep_decay_fold(d, n, seed, unital=True),
    "sigma_general": sweep_sigma,
    "sigma_unital": lambda d, n, seed=0: sweep_sigma(d, n, seed, unital=True),
}


def run_bounds(trials: int, dims: Sequence[int] = (2, 3, 4), seed: int = 0, tol: float = DEFAULT_TOL,
               shrink: float = 1.0) -> list[SweepResult]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    out = []
    for d in dims:
        out.append(sweep_chi00_pair(d, trials, seed, shrink))
        out.append(sweep_chi00_seq(d, max(1, trials // 10), seed))
        out.append(sweep_unitarity_pair(d, trials, seed))
        out.append(sweep_decay_fold(d, max(1, trials // 10), seed))
        out.append(sweep_decay_fold(d, max(1, trials // 10), seed, unital=True))
        out.append(sweep_sigma(d, max(1, trials // 10), seed))
        out.append(sweep_sigma(d, max(1, trials // 10), seed, unital=True))
    for r in out:
        r.tol = tol
    return out


def run_appendix(trials: int, dims: Sequence[int] = (2, 3, 4, 5, 6), seed: int = 0,
                 tol: float = DEFAULT_TOL) -> list[SweepResult]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    out = [sweep_appendix_pair(d, trials, seed) for d in dims]
    for r in out:
        r.tol = tol
    return out
