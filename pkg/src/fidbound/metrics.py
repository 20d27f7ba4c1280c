"""Scalar noise metrics of a channel and the linear fidelity conversions.

All algebraic metrics are read off the Liouville matrix. The Monte-Carlo
estimators ``fidelity_mc`` and ``unitarity_mc`` work from Kraus operators
and sampled Haar states only, so they can serve as independent checks.
"""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .channels import Channel, ChannelError

__all__ = [
    "Metric",
    "MetricKind",
    "ChannelMetrics",
    "chi00",
    "decay_rate",
    "unitarity",
    "fidelity",
    "infidelity",
    "coherence_angle",
    "angle_from_pu",
    "convert",
    "haar_states",
    "fidelity_mc",
    "unitarity_mc",
]


class Metric(str, enum.Enum):
    F = "F"
    R = "r"
    P = "p"
    CHI00 = "chi00"


class MetricKind(NamedTuple):
    metric: Metric
    dim: int


def chi00(ch: Channel) -> float:
    return float(ch.chi[0, 0].real)


def decay_rate(ch: Channel) -> float:
    d2 = ch.liouville.shape[0]
    return float(np.trace(ch.liouville[1:, 1:]) / (d2 - 1))


def unitarity(ch: Channel) -> float:
    d2 = ch.liouville.shape[0]
    return float(np.sum(ch.liouville[1:, 1:] ** 2) / (d2 - 1))


def fidelity(ch: Channel) -> float:
    return convert(decay_rate(ch), MetricKind(Metric.P, ch.dim), MetricKind(Metric.F, ch.dim))


def infidelity(ch: Channel) -> float:
    return convert(decay_rate(ch), MetricKind(Metric.P, ch.dim), MetricKind(Metric.R, ch.dim))


def angle_from_pu(p: float, u: float) -> float:
    """arccos(p / sqrt(u)) with the ratio clamped into [-1, 1]."""
    if not u > 0:
        raise ValueError(f"coherence angle needs positive unitarity, got {u}")
    return float(np.arccos(np.clip(p / np.sqrt(u), -1.0, 1.0)))


def coherence_angle(ch: Channel) -> float:
    """arccos(p / sqrt(u)), evaluated as an atan2 so it stays exact near 0."""
    block = ch.liouville[1:, 1:]
    if not np.any(block):
        raise ChannelError("coherence angle is undefined for a channel with zero unitarity")
    n = block.shape[0]
    p = np.trace(block) / n
    # ||block - p I||_F / sqrt(n) = sqrt(u - p^2), without the cancellation.
    return float(np.arctan2(np.linalg.norm(block - p * np.eye(n)) / np.sqrt(n), p))


# Table of the twelve affine maps between F, r, p and chi00 for dimension d.
def _table(d: int):
    M = Metric
    return {
        (M.F, M.R): lambda x: 1 - x,
        (M.F, M.P): lambda x: (d * x - 1) / (d - 1),
        (M.F, M.CHI00): lambda x: ((d + 1) * x - 1) / d,
        (M.R, M.F): lambda x: 1 - x,
        (M.R, M.P): lambda x: 1 - d / (d - 1) * x,
        (M.R, M.CHI00): lambda x: 1 - (d + 1) / d * x,
        (M.P, M.F): lambda x: ((d - 1) * x + 1) / d,
        (M.P, M.R): lambda x: (d - 1) / d * (1 - x),
        (M.P, M.CHI00): lambda x: ((d * d - 1) * x + 1) / (d * d),
        (M.CHI00, M.F): lambda x: (d * x + 1) / (d + 1),
        (M.CHI00, M.R): lambda x: d / (d + 1) * (1 - x),
        (M.CHI00, M.P): lambda x: (d * d * x - 1) / (d * d - 1),
    }


def convert(value, source: MetricKind, target: MetricKind):
    """Convert between fidelity, infidelity, RB decay rate and chi00.

    Accepts scalars or arrays. Both kinds must carry the same dimension.

    >>> convert(0.99, MetricKind(Metric.P, 2), MetricKind(Metric.R, 2))
    0.0050000000000000044
    """
    source = MetricKind(Metric(source[0]), int(source[1]))
    target = MetricKind(Metric(target[0]), int(target[1]))
    if source.dim != target.dim:
        raise ValueError(f"dimension mismatch: {source.dim} vs {target.dim}")
    if source.dim < 2:
        raise ValueError(f"dimension must be >= 2, got {source.dim}")
    if source.metric == target.metric:
        return value
    try:
        fn = _table(source.dim)[(source.metric, target.metric)]
    except KeyError:
        raise ValueError(f"no conversion from {source.metric} to {target.metric}") from None
    return fn(value)


@dataclass(frozen=True)
class ChannelMetrics:
    fidelity: float
    infidelity: float
    decay_rate: float
    chi00: float
    unitarity: float
    coherence_angle: float

    @classmethod
    def from_channel(cls, ch: Channel) -> "ChannelMetrics":
        p = decay_rate(ch)
        u = unitarity(ch)
        return cls(
            fidelity=fidelity(ch),
            infidelity=infidelity(ch),
            decay_rate=p,
            chi00=chi00(ch),
            unitarity=u,
            coherence_angle=coherence_angle(ch) if u > 0 else float("nan"),
        )

    def as_dict(self) -> dict:
        return asdict(self)


# -- Monte-Carlo oracles ---------------------------------------------------

def haar_states(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Haar-random pure states as rows of an (n, d) array."""
    z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _mean_and_sem(samples: np.ndarray) -> tuple[float, float]:
    n = samples.size
    mean = float(samples.mean())
    sem = float(samples.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return mean, sem


def fidelity_mc(ch: Channel, n_samples: int, seed=0, batch: int = 50_000) -> tuple[float, float]:
    """Haar average of <psi|E(psi)|psi>; returns (estimate, standard error)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    kraus = np.array(ch.kraus)
    out = []
    for start in range(0, n_samples, batch):
        psi = haar_states(ch.dim, min(batch, n_samples - start), rng)
        amps = np.einsum("ni,kij,nj->nk", psi.conj(), kraus, psi)
        out.append(np.sum(np.abs(amps) ** 2, axis=1))
    return _mean_and_sem(np.concatenate(out))


def unitarity_mc(ch: Channel, n_samples: int, seed=0, batch: int = 20_000) -> tuple[float, float]:
    """Haar average of d/(d-1) tr[E(psi - I/d)^2]; returns (estimate, standard error)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    d = ch.dim
    rng = np.random.default_rng(seed)
    kraus = np.array(ch.kraus)
    image_of_identity = np.einsum("kij,klj->il", kraus, kraus.conj())
    out = []
    for start in range(0, n_samples, batch):
        psi = haar_states(d, min(batch, n_samples - start), rng)
        phi = np.einsum("kij,nj->nki", kraus, psi)
        out_op = np.einsum("nki,nkl->nil", phi, phi.conj()) - image_of_identity / d
        out.append(d / (d - 1) * np.sum(np.abs(out_op) ** 2, axis=(1, 2)))
    return _mean_and_sem(np.concatenate(out))
