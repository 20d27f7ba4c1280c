"""Trace inequalities for real matrices with a prescribed coherence angle.

The coherence angle of a nonzero real d x d matrix is
``theta(M) = arccos(tr M / (sqrt(d) ||M||_F))``, the angle between ``M``
and the identity in the Frobenius inner product. Applied to the unital
block of a Liouville matrix it becomes the channel coherence angle.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .channels import Channel

__all__ = [
    "HypothesisError",
    "RealMatrixStats",
    "coherence_angle_real",
    "coherence_angle_batch",
    "pair_trace_bounds",
    "pair_trace_bounds_batch",
    "saturating_rotation",
    "geometric_sum_S",
    "geometric_sum_direct",
    "ProductTraceBound",
    "product_trace_bound",
    "SigmaReport",
    "unital_block_sigma_check",
]

# The closed form for S cancels badly when (m-1)(1-p) is small (the
# numerator is ~ m^2 (1-p)^2 / 2); sum directly there instead.
_S_DIRECT_CUTOFF = 1e-6


class HypothesisError(ValueError):
    """A matrix family violates the hypotheses of the product bound."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message if index is None else f"{message} (matrix index {index})")
        self.index = index


@dataclass(frozen=True)
class RealMatrixStats:
    dim: int
    trace: float
    frobenius_norm: float
    coherence_angle: float
    max_singular_value: float

    @classmethod
    def from_matrix(cls, m) -> "RealMatrixStats":
        m = np.asarray(m, dtype=float)
        return cls(
            dim=m.shape[0],
            trace=float(np.trace(m)),
            frobenius_norm=float(np.linalg.norm(m)),
            coherence_angle=coherence_angle_real(m),
            max_singular_value=float(np.linalg.norm(m, 2)),
        )


def _check_square(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")


def coherence_angle_real(m) -> float:
    m = np.asarray(m, dtype=float)
    _check_square(m)
    if not np.any(m):
        raise ValueError("coherence angle of the zero matrix is undefined")
    return float(coherence_angle_batch(m[None])[0])


def coherence_angle_batch(ms: np.ndarray) -> np.ndarray:
    """Coherence angles of a stack of matrices with shape (n, d, d).

    Uses ``||M - (tr M/d) I||_F = ||M||_F sin(theta)`` so that small angles
    keep full relative precision.
    """
    d = ms.shape[-1]
    tr = np.trace(ms, axis1=-2, axis2=-1)
    traceless = ms - (tr / d)[..., None, None] * np.eye(d)
    return np.arctan2(np.linalg.norm(traceless, axis=(-2, -1)), tr / np.sqrt(d))


def pair_trace_bounds(m1, m2) -> tuple[float, float, float]:
    """Return ``(cos(t1 + t2), tr(M1 M2)/(|M1| |M2|), cos(t1 - t2))``.

    The middle value always lies between the outer two.
    """
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    _check_square(m1)
    _check_square(m2)
    if m1.shape != m2.shape:
        raise ValueError(f"dimension mismatch {m1.shape} vs {m2.shape}")
    t1 = coherence_angle_real(m1)
    t2 = coherence_angle_real(m2)
    value = np.trace(m1 @ m2) / (np.linalg.norm(m1) * np.linalg.norm(m2))
    return float(np.cos(t1 + t2)), float(value), float(np.cos(t1 - t2))


def pair_trace_bounds_batch(m1: np.ndarray, m2: np.ndarray):
    t1 = coherence_angle_batch(m1)
    t2 = coherence_angle_batch(m2)
    value = np.einsum("nij,nji->n", m1, m2) / (
        np.linalg.norm(m1, axis=(1, 2)) * np.linalg.norm(m2, axis=(1, 2))
    )
    return np.cos(t1 + t2), value, np.cos(t1 - t2)


def saturating_rotation(norm: float, theta: float, d: int) -> np.ndarray:
    """``(norm/sqrt(d)) R(theta) kron I_{d/2}`` for even ``d``.

    Its Frobenius norm is ``norm`` and its coherence angle is ``theta``
    (for ``theta`` in [0, pi]). Pairs of these saturate both sides of
    :func:`pair_trace_bounds`.
    """
    if d % 2:
        raise ValueError(f"saturating rotations need even dimension, got {d}")
    if not norm > 0:
        raise ValueError("norm must be positive")
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    return norm / np.sqrt(d) * np.kron(rot, np.eye(d // 2))


def geometric_sum_direct(p: float, m: int) -> float:
    return float(sum(i * p ** (i - 1) for i in range(1, m)))


def geometric_sum_S(p: float, m: int) -> float:
    """``S(p, m) = sum_{i=1}^{m-1} i p^(i-1)``.

    Closed form ``(1 - m p^(m-1) + (m-1) p^m) / (1-p)^2``; equal to
    ``C(m, 2)`` at ``p = 1``. Falls back to the direct sum near ``p = 1``
    and whenever ``(m - 1)(1 - p) < 1``, where it costs fewer than
    ``1/(1-p)`` terms.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if p == 1:
        return float(comb(m, 2))
    if abs(1 - p) < _S_DIRECT_CUTOFF or (m - 1) * abs(1 - p) < 1:
        return geometric_sum_direct(p, m)
    return (1 - m * p ** (m - 1) + (m - 1) * p ** m) / (1 - p) ** 2


@dataclass(frozen=True)
class ProductTraceBound:
    deviation: float
    bound_S: float
    bound_binom: float
    p: float
    u: float
    theta: float

    @property
    def holds(self) -> bool:
        return self.deviation <= self.bound_S + 1e-9 and self.bound_S <= self.bound_binom + 1e-9


def product_trace_bound(matrices, sigma_max: float, tol: float = 1e-9) -> ProductTraceBound:
    """Deviation of ``tr(M_1...M_m)/d`` from ``p^m`` and its two upper bounds.

    Every matrix must share ``p = tr M/d``, ``u = ||M||_F^2/d`` and the
    coherence angle, with ``p, u <= 1``, and every prefix product must have
    spectral norm at most ``sigma_max`` (the empty prefix included, so
    ``sigma_max >= 1``). Violations raise
    :class:`HypothesisError` naming the offending index.

    The S-form bound uses ``|p|``, which the triangle inequality in the
    telescoping argument requires once ``p`` is negative.
    """
    mats = [np.asarray(m, dtype=float) for m in matrices]
    if not mats:
        raise HypothesisError("empty matrix list")
    d = mats[0].shape[0]
    for i, m in enumerate(mats):
        if m.shape != (d, d):
            raise HypothesisError(f"shape {m.shape} differs from {(d, d)}", i)
    ps = [np.trace(m) / d for m in mats]
    us = [np.sum(m * m) / d for m in mats]
    p, u = ps[0], us[0]
    if p > 1 + tol or u > 1 + tol:
        raise HypothesisError(f"need p <= 1 and u <= 1, got p={p:.6g}, u={u:.6g}", 0)
    if u <= 0:
        raise HypothesisError("zero matrix", 0)
    theta = float(np.arccos(np.clip(p / np.sqrt(u), -1, 1)))
    for i, (pi, ui) in enumerate(zip(ps, us)):
        if abs(pi - p) > tol or abs(ui - u) > tol:
            raise HypothesisError("matrices do not share p and u", i)
    if sigma_max < 1 - tol:
        # The empty prefix (identity) enters the telescoping sum too.
        raise HypothesisError(f"sigma_max={sigma_max:.6g} is below the identity prefix norm 1")
    prefix = np.eye(d)
    for i, m in enumerate(mats):
        prefix = prefix @ m
        if np.linalg.norm(prefix, 2) > sigma_max + tol:
            raise HypothesisError(f"prefix spectral norm exceeds sigma_max={sigma_max:.6g}", i)
    mlen = len(mats)
    deviation = abs(np.trace(prefix) / d - p ** mlen)
    sin2 = np.sin(theta) ** 2
    return ProductTraceBound(
        deviation=float(deviation),
        bound_S=float(sigma_max * geometric_sum_S(abs(p), mlen) * u * sin2),
        bound_binom=float(sigma_max * comb(mlen, 2) * u * sin2),
        p=float(p),
        u=float(u),
        theta=theta,
    )


@dataclass(frozen=True)
class SigmaReport:
    sigma_max: float
    general_bound: float
    is_unital: bool
    within_general: bool
    within_unital: bool | None


def unital_block_sigma_check(ch: Channel, tol: float = 1e-9) -> SigmaReport:
    """Largest singular value of the unital block against sqrt(d/2) and 1."""
    block = ch.liouville[1:, 1:]
    sigma = float(np.linalg.norm(block, 2))
    general = float(np.sqrt(ch.dim / 2))
    unital = bool(np.max(np.abs(ch.liouville[1:, 0])) <= tol)
    return SigmaReport(
        sigma_max=sigma,
        general_bound=general,
        is_unital=unital,
        within_general=sigma <= general + tol,
        within_unital=(sigma <= 1 + tol) if unital else None,
    )
