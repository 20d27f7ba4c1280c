"""Named channels, saturating families and random channel ensembles."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

from .channels import (
    Channel,
    ChannelError,
    from_blocks,
    from_chi,
    from_kraus,
    make_basis,
    validate_cptp,
)
from .metrics import Metric, MetricKind, convert, fidelity, unitarity

__all__ = [
    "identity",
    "depolarizing",
    "pauli_channel",
    "unitary_channel",
    "phase_unitary",
    "z_rotation",
    "rotation_damping_qubit",
    "amplitude_damping_qubit",
    "conjugate",
    "mix",
    "random_unitary_matrix",
    "random_unitary_batch",
    "random_cptp_liouville_batch",
    "random_unitary",
    "random_cptp",
    "random_unital",
    "random_near_identity",
    "EnsembleSpec",
    "random_with_targets",
]


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _require_cptp(ch: Channel, what: str, tol: float = 1e-9) -> Channel:
    report = validate_cptp(ch, tol)
    if not report.is_cp:
        raise ChannelError(
            f"{what} is not completely positive (min Choi eigenvalue {report.min_choi_eigenvalue:.3g})"
        )
    return ch


def identity(d: int = 2) -> Channel:
    return Channel(np.eye(d * d))


def depolarizing(p: float, d: int = 2) -> Channel:
    """``rho -> p rho + (1 - p) I/d``; CP for ``p`` in ``[-1/(d^2-1), 1]``."""
    lo = -1 / (d * d - 1)
    if not lo - 1e-12 <= p <= 1 + 1e-12:
        raise ChannelError(f"depolarizing parameter {p} outside CP range [{lo:.6g}, 1]")
    return Channel(np.diag([1.0] + [float(p)] * (d * d - 1)))


def pauli_channel(probs: Sequence[float]) -> Channel:
    """Channel with diagonal chi matrix ``probs`` in the Pauli basis."""
    probs = np.asarray(probs, dtype=float)
    d = int(round(np.sqrt(probs.size)))
    if d * d != probs.size or d & (d - 1):
        raise ChannelError(f"need 4^n probabilities, got {probs.size}")
    if np.any(probs < 0) or abs(probs.sum() - 1) > 1e-12:
        raise ChannelError("Pauli probabilities must be nonnegative and sum to 1")
    return from_chi(np.diag(probs), "pauli")


def unitary_channel(u: np.ndarray) -> Channel:
    return from_kraus([np.asarray(u, dtype=complex)])


def phase_unitary(phi: float, d: int = 2) -> Channel:
    """``diag(e^{i phi}, e^{-i phi}) kron I_{d/2}``, with chi00 = cos^2 phi."""
    if d % 2:
        raise ChannelError(f"phase unitaries need even dimension, got {d}")
    u = np.kron(np.diag([np.exp(1j * phi), np.exp(-1j * phi)]), np.eye(d // 2))
    return unitary_channel(u)


def z_rotation(theta: float) -> Channel:
    """Qubit rotation by ``theta`` about z (Bloch x -> cos x + sin y)."""
    return rotation_damping_qubit(1.0, 1.0, theta)


def rotation_damping_qubit(gamma: float, lam: float, theta: float) -> Channel:
    """Unital qubit channel: z-rotation by ``theta``, transverse contraction
    ``gamma`` and longitudinal contraction ``lam``.

    p = (2 gamma cos(theta) + lam)/3 and u = (2 gamma^2 + lam^2)/3.
    """
    c, s = np.cos(theta), np.sin(theta)
    block = np.array([[gamma * c, -gamma * s, 0.0], [gamma * s, gamma * c, 0.0], [0.0, 0.0, lam]])
    ch = from_blocks(np.zeros(3), block, "pauli")
    return _require_cptp(ch, f"rotation-damping channel (gamma={gamma}, lam={lam}, theta={theta})")


def amplitude_damping_qubit(gamma_ad: float, rotation: float = 0.0) -> Channel:
    """Amplitude damping toward |0> followed by a z-rotation."""
    if not 0 <= gamma_ad <= 1:
        raise ChannelError(f"amplitude damping parameter must lie in [0, 1], got {gamma_ad}")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma_ad)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma_ad)], [0, 0]], dtype=complex)
    return z_rotation(rotation) @ from_kraus([k0, k1])


def conjugate(ch: Channel, u: np.ndarray) -> Channel:
    """``U o ch o U^dagger``; preserves p and u."""
    lu = unitary_channel(u).liouville
    return Channel(lu @ ch.liouville @ lu.T, ch.basis_kind)


def mix(channels: Sequence[Channel], weights: Sequence[float]) -> Channel:
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
        raise ChannelError("mixing weights must be a probability vector")
    liou = sum(w * c.liouville for w, c in zip(weights, channels))
    liou[0] = np.eye(1, liou.shape[0])[0]
    return Channel(liou, channels[0].basis_kind)


# -- random ensembles ------------------------------------------------------

def random_unitary_matrix(d: int, seed=None) -> np.ndarray:
    """Haar unitary from the QR decomposition of a complex Ginibre matrix."""
    rng = _rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_unitary_batch(d: int, n: int, seed=None) -> np.ndarray:
    """``n`` Haar unitaries stacked into shape (n, d, d)."""
    rng = _rng(seed)
    z = (rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    return q * (diag / np.abs(diag))[:, None, :]


def random_cptp_liouville_batch(d: int, n: int, seed=None, kraus_rank: int | None = None
                                ) -> np.ndarray:
    """Liouville matrices (generalized Gell-Mann or Pauli basis) of ``n``
    random channels, shape (n, d^2, d^2). Same ensemble as :func:`random_cptp`.
    """
    k = d * d if kraus_rank is None else kraus_rank
    iso = random_unitary_batch(d * k, n, seed)[:, :, :d]
    kraus = iso.reshape(n, k, d, d)
    superop = np.einsum("nkij,nkab->niajb", kraus, kraus.conj()).reshape(n, d * d, d * d)
    t = make_basis(d).vec_matrix
    return (t.conj().T @ superop @ t).real


def random_unitary(d: int, seed=None) -> Channel:
    return unitary_channel(random_unitary_matrix(d, seed))


def random_cptp(d: int, kraus_rank: int | None = None, seed=None) -> Channel:
    """Random channel from a Haar isometry into ``d * kraus_rank`` dimensions."""
    kraus_rank = d * d if kraus_rank is None else kraus_rank
    if not 1 <= kraus_rank <= d * d:
        raise ChannelError(f"Kraus rank must lie in [1, {d * d}], got {kraus_rank}")
    iso = random_unitary_matrix(d * kraus_rank, seed)[:, :d]
    return from_kraus(list(iso.reshape(kraus_rank, d, d)), make_basis(d))


def random_unital(d: int, n_terms: int = 3, seed=None) -> Channel:
    """Random mixture of Haar unitaries (always unital)."""
    rng = _rng(seed)
    weights = rng.dirichlet(np.ones(n_terms))
    return mix([random_unitary(d, rng) for _ in range(n_terms)], weights)


def random_near_identity(d: int, scale: float = 0.05, seed=None, kraus_rank: int | None = None
                         ) -> Channel:
    """Weakly noisy channel: a small random unitary mixed with a random channel.

    ``scale`` sets both the rotation size and the mixing weight of the
    random CPTP part, so the infidelity is of order ``scale**2``.
    """
    rng = _rng(seed)
    h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (h + h.conj().T) / (2 * np.sqrt(d))
    small = unitary_channel(expm(1j * scale * rng.uniform() * h))
    weight = scale ** 2 * rng.uniform()
    return mix([small, random_cptp(d, kraus_rank, rng)], [1 - weight, weight])


@dataclass(frozen=True)
class EnsembleSpec:
    dim: int = 2
    target_fidelity: float | None = None
    target_unitarity: float | None = None
    tolerance: float = 1e-9
    kraus_rank: int | None = None
    seed: int | None = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.target_unitarity is not None and self.target_fidelity is None:
            raise ValueError("a unitarity target also needs a fidelity target")
        if self.target_fidelity is not None:
            p = convert(self.target_fidelity, MetricKind(Metric.F, self.dim), MetricKind(Metric.P, self.dim))
            if p > 1 + self.tolerance:
                raise ValueError(f"fidelity target {self.target_fidelity} exceeds 1")
            u = self.target_unitarity
            if u is not None and (u > 1 + self.tolerance or p * p > u + self.tolerance):
                raise ValueError(
                    f"infeasible targets: need p^2 <= u <= 1, got p={p:.8g}, u={u:.8g}"
                )


def _family_interval(p: float, u: float) -> tuple[float, float]:
    """Feasible range of the longitudinal contraction for targets (p, u).

    With ``gamma(lam) = sqrt((3u - lam^2)/2)``, a rotation angle exists when
    ``2 gamma + lam >= 3p`` and the channel is CP when ``lam + 1 >= 2 gamma``.
    """
    def gamma(lam):
        return np.sqrt(max(3 * u - lam * lam, 0.0) / 2)

    def reach(lam):
        return 2 * gamma(lam) + lam - 3 * p

    def cp_margin(lam):
        return lam + 1 - 2 * gamma(lam)

    peak = np.sqrt(u)
    lam_max = min(1.0, np.sqrt(3 * u))
    if reach(peak) <= 1e-15:
        return peak, peak
    left = -np.sqrt(3 * u)
    lo = brentq(reach, left, peak, xtol=1e-15) if reach(left) < 0 else left
    hi = brentq(reach, peak, lam_max, xtol=1e-15) if reach(lam_max) < 0 else lam_max
    if cp_margin(hi) < 0:
        if cp_margin(hi) > -1e-12:
            return hi, hi
        raise ValueError(f"no CP channel in the family reaches p={p:.8g}, u={u:.8g}")
    if cp_margin(lo) < 0:
        lo = brentq(cp_margin, lo, hi, xtol=1e-15)
    return lo, hi


def random_with_targets(spec: EnsembleSpec) -> Channel:
    """Random channel with prescribed fidelity and (optionally) unitarity.

    Qubit only when targets are set: draws a member of the
    rotation-damping family that meets the targets exactly, then conjugates
    it by a Haar unitary (which leaves p and u unchanged). Without a
    unitarity target one is drawn uniformly from ``[p^2, 1]``.
    """
    rng = _rng(spec.seed)
    if spec.target_fidelity is None:
        return random_cptp(spec.dim, spec.kraus_rank, rng)
    if spec.dim != 2:
        raise ValueError("fidelity/unitarity targets are supported for qubits only")
    p = convert(spec.target_fidelity, MetricKind(Metric.F, 2), MetricKind(Metric.P, 2))
    u = spec.target_unitarity
    if u is None:
        u = rng.uniform(p * p, 1.0)
    u = min(max(u, p * p), 1.0)
    lo, hi = _family_interval(p, u)
    lam = rng.uniform(lo, hi)
    gamma = np.sqrt(max(3 * u - lam * lam, 0.0) / 2)
    cos_t = np.clip((3 * p - lam) / (2 * gamma), -1.0, 1.0)
    theta = np.arccos(cos_t) * rng.choice([-1.0, 1.0])
    # Round-off can push a boundary draw a hair outside the CP region.
    gamma = min(gamma, (1 + lam) / 2)
    ch = conjugate(rotation_damping_qubit(gamma, lam, theta), random_unitary_matrix(2, rng))
    got_f, got_u = fidelity(ch), unitarity(ch)
    if abs(got_f - spec.target_fidelity) > spec.tolerance or (
        spec.target_unitarity is not None and abs(got_u - spec.target_unitarity) > spec.tolerance
    ):
        raise RuntimeError(
            f"target search missed: F={got_f:.12g} (want {spec.target_fidelity}), "
            f"u={got_u:.12g} (want {spec.target_unitarity})"
        )
    return ch
