"""Single-qubit standard and interleaved randomized benchmarking simulation.

Noise model: every gate ``g`` is implemented as ``E_g o G`` (ideal gate,
then its error channel). A sequence of length ``m`` holds ``m - 1``
uniformly random gates followed by the inverse of their product, which
carries its own error too; counting the inversion makes a depolarizing
error decay as exactly ``p**m``. In interleaved mode a fixed gate ``h``
(with error ``E_h``) is applied after every random gate.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .bounds import (
    BoundInterval,
    interleaved_chi00_bounds,
    interleaved_decay_bounds,
    interval_to_metric,
    naive_group_bound,
)
from .channels import Channel, make_basis
from .metrics import Metric, MetricKind, angle_from_pu, convert
from .zoo import identity, unitary_channel

__all__ = [
    "GateSet",
    "clifford_24",
    "twodesign_12",
    "frame_potential",
    "twirl",
    "average_error",
    "Interleave",
    "survival_exact",
    "survival_sampled",
    "DEFAULT_LENGTHS",
    "RBRun",
    "run_rb",
    "DecayFit",
    "ExponentialDecay",
    "fit_decay",
    "InterleavedReport",
    "interleaved_report",
]

DEFAULT_LENGTHS = (1, 2, 4, 8, 16, 32, 64, 128)
DEFAULT_NSEQS = 200

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1, -1]).astype(complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])


def _rotation(axis: Sequence[float], angle: float) -> np.ndarray:
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    gen = n[0] * _X + n[1] * _Y + n[2] * _Z
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * gen


def _normalize_phase(u: np.ndarray) -> np.ndarray:
    u = u / np.sqrt(np.linalg.det(u))
    flat = u.reshape(-1)
    lead = flat[np.argmax(np.abs(flat) > 1e-9)]
    if lead.real < -1e-12 or (abs(lead.real) <= 1e-12 and lead.imag < 0):
        u = -u
    return u


def _snap(x: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Round entries lying within ``tol`` of an integer (Clifford Liouville
    matrices are signed permutations, so this makes them exact)."""
    r = np.round(x)
    return np.where(np.abs(x - r) < tol, r, x)


def _key(liou: np.ndarray) -> tuple:
    return tuple(np.round(liou, 8).ravel())


def _close_group(generators: Iterable[np.ndarray]) -> list[np.ndarray]:
    """Breadth-first closure of the generators, modulo global phase."""
    gens = [_normalize_phase(np.asarray(g, dtype=complex)) for g in generators]
    elems = [np.eye(2, dtype=complex)]
    seen = {_key(unitary_channel(elems[0]).liouville)}
    frontier = list(elems)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = _normalize_phase(g @ a)
                k = _key(unitary_channel(b).liouville)
                if k not in seen:
                    seen.add(k)
                    elems.append(b)
                    nxt.append(b)
        frontier = nxt
    return elems


@dataclass(frozen=True, eq=False)
class GateSet:
    """A finite gate group with one error channel per element."""

    name: str
    unitaries: tuple
    noise: tuple = ()
    ideal: np.ndarray = field(init=False, repr=False)
    table: np.ndarray = field(init=False, repr=False)
    inverse: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ideal = _snap(np.array([unitary_channel(u).liouville for u in self.unitaries]))
        keys = {_key(m): i for i, m in enumerate(ideal)}
        n = len(ideal)
        table = np.empty((n, n), dtype=int)
        for i in range(n):
            for j in range(n):
                try:
                    table[i, j] = keys[_key(ideal[i] @ ideal[j])]
                except KeyError:
                    raise ValueError(f"gate set {self.name!r} is not closed under products") from None
        ident = keys.get(_key(np.eye(ideal.shape[1])))
        if ident is None:
            raise ValueError(f"gate set {self.name!r} lacks the identity")
        inverse = np.argmax(table == ident, axis=1)
        noise = tuple(self.noise) or (identity(2),) * n
        if len(noise) != n:
            raise ValueError(f"need {n} noise channels, got {len(noise)}")
        object.__setattr__(self, "noise", noise)
        object.__setattr__(self, "ideal", ideal)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "inverse", inverse)

    def __len__(self) -> int:
        return len(self.unitaries)

    @property
    def identity_index(self) -> int:
        return int(self.table[0, self.inverse[0]])

    def index_of(self, u: np.ndarray) -> int:
        key = _key(unitary_channel(u).liouville)
        for i, m in enumerate(self.ideal):
            if _key(m) == key:
                return i
        raise KeyError("unitary is not in the gate set")

    def with_noise(self, noise: Channel | Sequence[Channel]) -> "GateSet":
        if isinstance(noise, Channel):
            noise = (noise,) * len(self)
        return GateSet(self.name, self.unitaries, tuple(noise))

    @property
    def gate_independent(self) -> bool:
        first = self.noise[0].liouville
        return all(np.allclose(c.liouville, first, rtol=0, atol=1e-12) for c in self.noise)

    @property
    def noisy(self) -> np.ndarray:
        """Liouville matrices of the noisy gates ``E_g G``."""
        return np.array([c.liouville for c in self.noise]) @ self.ideal


def clifford_24(noise=None) -> GateSet:
    gs = GateSet("clifford24", tuple(_close_group([_H, _S])))
    return gs if noise is None else gs.with_noise(noise)


def twodesign_12(noise=None) -> GateSet:
    """The tetrahedral (12-element) subgroup of the single-qubit Cliffords."""
    gens = [_X, _Y, _rotation((1, 1, 1), 2 * np.pi / 3)]
    gs = GateSet("twodesign12", tuple(_close_group(gens)))
    return gs if noise is None else gs.with_noise(noise)


GATESETS = {"clifford24": clifford_24, "twodesign12": twodesign_12}


def frame_potential(gs: GateSet) -> float:
    """``sum_{g,h} |tr(g^dagger h)|^4 / |G|^2``; equals 2 exactly for a 2-design."""
    us = np.array(gs.unitaries)
    overlaps = np.einsum("aji,bji->ab", us.conj(), us)
    return float(np.sum(np.abs(overlaps) ** 4) / len(gs) ** 2)


def twirl(gs: GateSet, ch: Channel) -> Channel:
    """Group average of ``G^dagger o ch o G``."""
    g = gs.ideal
    return Channel(np.mean(np.transpose(g, (0, 2, 1)) @ ch.liouville @ g, axis=0), ch.basis_kind)


def average_error(gs: GateSet) -> Channel:
    return Channel(np.mean([c.liouville for c in gs.noise], axis=0), gs.noise[0].basis_kind)


@dataclass(frozen=True)
class Interleave:
    """Interleave gate ``gate`` (an index into the gate set) after every random gate.

    ``noise`` overrides the gate set's own error for that gate.
    """

    gate: int
    noise: Channel | None = None


def _state_vectors(state, meas) -> tuple[np.ndarray, np.ndarray]:
    # Work with tr(P rho) rather than tr(P rho)/sqrt(2) so |0><0| maps to
    # exact entries; the factor 1/2 goes onto the effect.
    basis = make_basis(2, "pauli")
    ket0 = np.diag([1.0, 0.0])
    rho = _snap(basis.expand(ket0 if state is None else state).real * np.sqrt(2))
    eff = _snap(basis.expand(ket0 if meas is None else meas).real * np.sqrt(2))
    return rho, eff / 2


def _interleaved_gate(gs: GateSet, interleave: Interleave) -> np.ndarray:
    noise = interleave.noise if interleave.noise is not None else gs.noise[interleave.gate]
    return noise.liouville @ gs.ideal[interleave.gate]


def survival_exact(gs: GateSet, m: int, interleave: Interleave | None = None,
                   state=None, meas=None) -> float:
    """Sequence-averaged survival probability, computed through the twirl.

    Needs gate-independent noise ``E``. With ``Q = E`` (standard) or
    ``Q = E_h H E H^dagger`` (interleaved), the average is
    ``<<meas| E T[Q]^(m-1) |state>>``.
    """
    if m < 1:
        raise ValueError("sequence length must be >= 1")
    if not gs.gate_independent:
        raise ValueError("exact averaging requires gate-independent noise; use survival_sampled")
    err = gs.noise[0].liouville
    if interleave is None:
        q = err
    else:
        h = gs.ideal[interleave.gate]
        q = _interleaved_gate(gs, interleave) @ err @ h.T
    t = twirl(gs, Channel(q)).liouville
    rho, eff = _state_vectors(state, meas)
    return float(eff @ err @ np.linalg.matrix_power(t, m - 1) @ rho)


def survival_sampled(gs: GateSet, m: int, n_seqs: int, seed=0, interleave: Interleave | None = None,
                     state=None, meas=None) -> tuple[float, float]:
    """Monte-Carlo estimate of the survival probability over ``n_seqs`` sequences.

    Returns ``(mean, standard error)``; deterministic for a given seed.
    """
    if m < 1 or n_seqs < 1:
        raise ValueError("need m >= 1 and n_seqs >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    noisy = gs.noisy
    rho, eff = _state_vectors(state, meas)
    draws = rng.integers(len(gs), size=(n_seqs, m - 1))
    vec = np.tile(rho, (n_seqs, 1))
    net = np.full(n_seqs, gs.identity_index)
    if interleave is not None:
        h_noisy = _interleaved_gate(gs, interleave)
    for k in range(m - 1):
        g = draws[:, k]
        vec = np.einsum("nij,nj->ni", noisy[g], vec)
        net = gs.table[g, net]
        if interleave is not None:
            vec = vec @ h_noisy.T
            net = gs.table[interleave.gate, net]
    inv = gs.inverse[net]
    vec = np.einsum("nij,nj->ni", noisy[inv], vec)
    values = vec @ eff
    sem = float(values.std(ddof=1) / np.sqrt(n_seqs)) if n_seqs > 1 else 0.0
    return float(values.mean()), sem


# -- decay fitting ---------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    A: float
    B: float
    p: float
    residual: float
    p_stderr: float
    identifiable: bool

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("A", "B", "p", "residual", "p_stderr", "identifiable")}


def _linear_ab(m: np.ndarray, y: np.ndarray, p: float):
    design = np.column_stack([p ** m, np.ones_like(m)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return coef, float(np.sum((design @ coef - y) ** 2))


class ExponentialDecay(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``y = A p**m + B``.

    A grid over ``p`` (with ``A``, ``B`` solved linearly at each point)
    seeds a Levenberg-Marquardt refinement of all three parameters.

    Parameters
    ----------
    n_grid : int
        Number of grid points for the initial scan of ``p``.
    max_nfev : int
        Iteration budget for the refinement.
    """

    def __init__(self, n_grid: int = 400, max_nfev: int = 2000):
        self.n_grid = n_grid
        self.max_nfev = max_nfev

    def fit(self, X, y):
        X, y = check_X_y(np.asarray(X, dtype=float).reshape(-1, 1), y, y_numeric=True)
        m = X[:, 0]
        if np.unique(m).size < 3:
            raise ValueError("need at least 3 distinct sequence lengths")
        grid = np.concatenate([1 - np.logspace(-7, 0, self.n_grid)[::-1], np.linspace(-0.99, 0, 50)])
        best = min(grid, key=lambda p: _linear_ab(m, y, p)[1])
        (a0, b0), _ = _linear_ab(m, y, best)
        sol = least_squares(
            lambda x: x[0] * x[2] ** m + x[1] - y,
            x0=[a0, b0, best],
            method="lm",
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
            max_nfev=self.max_nfev,
        )
        if sol.status <= 0:
            raise RuntimeError(f"decay fit did not converge: {sol.message}")
        a, b, p = sol.x
        sse = float(np.sum(sol.fun ** 2))
        dof = max(m.size - 3, 1)
        try:
            cov = np.linalg.inv(sol.jac.T @ sol.jac) * sse / dof
            p_err = float(np.sqrt(max(cov[2, 2], 0.0)))
        except np.linalg.LinAlgError:
            p_err = float("inf")
        self.A_, self.B_, self.p_ = float(a), float(b), float(p)
        self.residual_ = float(np.sqrt(sse))
        self.p_stderr_ = p_err
        self.identifiable_ = bool(abs(a) > 1e-8 * max(1.0, abs(b)))
        return self

    def predict(self, X):
        check_is_fitted(self, "p_")
        m = check_array(np.asarray(X, dtype=float).reshape(-1, 1))[:, 0]
        return self.A_ * self.p_ ** m + self.B_

    def to_result(self) -> DecayFit:
        check_is_fitted(self, "p_")
        return DecayFit(self.A_, self.B_, self.p_, self.residual_, self.p_stderr_, self.identifiable_)


def fit_decay(points: Iterable[tuple[float, float]]) -> DecayFit:
    """Fit ``y = A p^m + B`` to ``(m, y)`` pairs."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[1] < 2:
        raise ValueError("points must be (m, y) pairs")
    return ExponentialDecay().fit(pts[:, 0], pts[:, 1]).to_result()


# -- runs ------------------------------------------------------------------

@dataclass
class RBRun:
    mode: str
    lengths: tuple[int, ...]
    method: str
    n_seqs: int | None = None
    seed: int | None = None
    interleaved_gate: int | None = None
    survival: list[tuple[int, float, float]] = field(default_factory=list)
    fit: DecayFit | None = None

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise ValueError("lengths must be strictly increasing")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["m", "p_surv", "std_error"])
        for m, p, se in self.survival:
            writer.writerow([m, repr(float(p)), repr(float(se))])
        return buf.getvalue()

    @staticmethod
    def points_from_csv(text: str) -> list[tuple[int, float, float]]:
        rows = csv.DictReader(io.StringIO(text))
        return [(int(r["m"]), float(r["p_surv"]), float(r["std_error"])) for r in rows]


def run_rb(gs: GateSet, lengths: Sequence[int] = DEFAULT_LENGTHS, method: str = "sampled",
           n_seqs: int = DEFAULT_NSEQS, seed: int = 0, interleave: Interleave | None = None,
           fit: bool = True) -> RBRun:
    """Simulate survival probabilities at each length and fit the decay.

    In sampled mode each length draws from its own stream keyed by
    ``(seed, m)``, so results do not depend on which other lengths run.
    """
    if method not in ("exact", "sampled"):
        raise ValueError(f"unknown method {method!r}")
    run = RBRun(
        mode="standard" if interleave is None else "interleaved",
        lengths=tuple(int(m) for m in lengths),
        method=method,
        n_seqs=n_seqs if method == "sampled" else None,
        seed=seed if method == "sampled" else None,
        interleaved_gate=None if interleave is None else interleave.gate,
    )
    for m in run.lengths:
        if method == "exact":
            run.survival.append((m, survival_exact(gs, m, interleave), 0.0))
        else:
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(m,)))
            mean, se = survival_sampled(gs, m, n_seqs, rng, interleave)
            run.survival.append((m, mean, se))
    if fit:
        run.fit = fit_decay((m, p) for m, p, _ in run.survival)
    return run


# -- interleaved analysis --------------------------------------------------

@dataclass(frozen=True)
class InterleavedReport:
    f_point_estimate: float
    chi00_route: BoundInterval
    unitarity_route: BoundInterval | None
    naive_route: BoundInterval | None

    def as_dict(self) -> dict:
        out = {"f_point_estimate": self.f_point_estimate, "chi00_route": self.chi00_route.as_dict()}
        out["unitarity_route"] = None if self.unitarity_route is None else self.unitarity_route.as_dict()
        out["naive_route"] = None if self.naive_route is None else self.naive_route.as_dict()
        return out


def interleaved_report(p_std: float, p_int: float, u_ref: float | None = None, d: int = 2,
                       group_size: int | None = None) -> InterleavedReport:
    """Fidelity intervals for the interleaved gate's error ``E_h``.

    ``p_std`` and ``p_int`` are the fitted standard and interleaved decay
    rates, ``u_ref`` the unitarity of the reference error. Intervals are
    reported in fidelity units; the unitarity route is omitted when
    ``u_ref`` is not given.
    """
    p_kind, chi_kind = MetricKind(Metric.P, d), MetricKind(Metric.CHI00, d)
    clip = lambda x: float(np.clip(x, 0.0, 1.0))
    chi_route = interleaved_chi00_bounds(
        clip(convert(p_int, p_kind, chi_kind)), clip(convert(p_std, p_kind, chi_kind))
    )
    uni_route = None
    if u_ref is not None:
        theta = angle_from_pu(p_std, u_ref)
        uni_route = interval_to_metric(interleaved_decay_bounds(p_int, u_ref, theta), Metric.F, d)
    naive = None
    if group_size is not None:
        r_ref = convert(p_std, p_kind, MetricKind(Metric.R, d))
        r_max = naive_group_bound(max(r_ref, 0.0), group_size)
        naive = BoundInterval(Metric.F, max(0.0, 1 - r_max), 1.0, "naive group bound", (), d)
    ratio = p_int / p_std if p_std != 0 else float("nan")
    return InterleavedReport(
        f_point_estimate=float(convert(ratio, p_kind, MetricKind(Metric.F, d))),
        chi00_route=interval_to_metric(chi_route, Metric.F, d),
        unitarity_route=uni_route,
        naive_route=naive,
    )
