"""Closed-form bounds on composite and individual error rates.

Every interval is returned as a :class:`BoundInterval`. Hypothesis failures
never raise; the interval degrades to the trivial range and the failure is
recorded in ``assumptions``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import NamedTuple, Sequence

import numpy as np

from .matrix_lab import geometric_sum_S
from .metrics import Metric, MetricKind, angle_from_pu, convert

__all__ = [
    "BoundInterval",
    "chi00_pair_bounds",
    "chi00_seq_lower",
    "GrowthBound",
    "infidelity_growth_upper",
    "decay_pair_bounds",
    "CompositeDecayBound",
    "composite_decay_bound",
    "intermediate_regime_upper",
    "interleaved_chi00_bounds",
    "interleaved_uncertainty_naive",
    "naive_group_bound",
    "interleaved_decay_bounds",
    "interval_to_metric",
]

ANGLE_OK = "angle condition satisfied"
ANGLE_VIOLATED = "angle condition violated"

_RANGES = {
    Metric.F: (0.0, 1.0),
    Metric.CHI00: (0.0, 1.0),
    Metric.P: (-1.0, 1.0),
    Metric.R: (0.0, 1.0),
}


@dataclass(frozen=True)
class BoundInterval:
    kind: Metric
    lower: float
    upper: float
    source: str
    assumptions: tuple[str, ...] = field(default_factory=tuple)
    dim: int | None = None

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "lower": self.lower,
            "upper": self.upper,
            "source": self.source,
            "assumptions": list(self.assumptions),
            **({"dim": self.dim} if self.dim is not None else {}),
        }


def _interval(kind: Metric, lower: float, upper: float, source: str, assumptions=(), dim=None):
    lo, hi = _RANGES.get(kind, (0.0, np.inf))
    lower = float(min(max(lower, lo), hi))
    upper = float(min(max(upper, lo), hi))
    return BoundInterval(kind, min(lower, upper), max(lower, upper), source, tuple(assumptions), dim)


def _check_unit(name: str, x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def _angle(chi: float) -> float:
    return float(np.arccos(np.sqrt(min(max(chi, 0.0), 1.0))))


def chi00_pair_bounds(chi_x: float, chi_y: float, shrink: float = 1.0) -> BoundInterval:
    """Range of chi00 for the composition of channels with the given chi00.

    The interval is ``center +/- half`` with ``center = cx cy + (1-cx)(1-cy)``
    and ``half = 2 sqrt(cx cy (1-cx)(1-cy))``, i.e. ``[cos^2(a+b), cos^2(a-b)]``
    for the angles ``a = arccos sqrt(cx)``, ``b = arccos sqrt(cy)``. The lower
    end only holds while ``a + b <= pi/2``; past that the composite can reach
    chi00 = 0 and the lower end drops to 0 (flagged).

    ``shrink`` scales the half-width; it exists only so verification
    harnesses can inject a deliberately wrong bound.
    """
    _check_unit("chi_x", chi_x)
    _check_unit("chi_y", chi_y)
    center = chi_x * chi_y + (1 - chi_x) * (1 - chi_y)
    half = 2 * np.sqrt(chi_x * chi_y * (1 - chi_x) * (1 - chi_y)) * shrink
    if _angle(chi_x) + _angle(chi_y) > np.pi / 2:
        return _interval(Metric.CHI00, 0.0, center + half, "chi00 pair bound", (ANGLE_VIOLATED,))
    return _interval(Metric.CHI00, center - half, center + half, "chi00 pair bound", (ANGLE_OK,))


def chi00_seq_lower(chis: Sequence[float]) -> BoundInterval:
    """Lower bound ``cos^2(sum_i arccos sqrt(chi_i))`` for a composite.

    Valid while the angle sum stays at or below pi/2; otherwise the lower
    endpoint is 0 and the interval is flagged.
    """
    if len(chis) == 0:
        raise ValueError("need at least one chi00 value")
    for c in chis:
        _check_unit("chi00", c)
    total = sum(_angle(c) for c in chis)
    if total <= np.pi / 2:
        return _interval(Metric.CHI00, np.cos(total) ** 2, 1.0, "chi00 sequence bound", (ANGLE_OK,))
    return _interval(Metric.CHI00, 0.0, 1.0, "chi00 sequence bound", (ANGLE_VIOLATED,))


class GrowthBound(NamedTuple):
    bound: float
    leading_order: float
    assumptions: tuple[str, ...]


def infidelity_growth_upper(r: float, m: int, d: int) -> GrowthBound:
    """Worst-case infidelity of ``m`` composed channels of infidelity ``r``."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    r_max = (d - 1) / d
    if not 0 <= r <= r_max + 1e-15:
        raise ValueError(f"r must lie in [0, {r_max}], got {r}")
    chi_kind, r_kind = MetricKind(Metric.CHI00, d), MetricKind(Metric.R, d)
    angle = m * _angle(convert(r, r_kind, chi_kind))
    if angle > np.pi / 2:
        return GrowthBound(d / (d + 1), m * m * r, (ANGLE_VIOLATED,))
    return GrowthBound(float(convert(np.cos(angle) ** 2, chi_kind, r_kind)), m * m * r, (ANGLE_OK,))


def _check_pu(p: float, u: float, tol: float = 1e-12) -> None:
    if not 0 < u <= 1 + tol:
        raise ValueError(f"unitarity must lie in (0, 1], got {u}")
    if p * p > u + tol:
        raise ValueError(f"need p^2 <= u, got p={p}, u={u}")


def decay_pair_bounds(p_x: float, u_x: float, p_y: float, u_y: float) -> BoundInterval:
    """Range of the decay rate of ``XY`` given ``(p, u)`` of each factor."""
    _check_pu(p_x, u_x)
    _check_pu(p_y, u_y)
    tx, ty = angle_from_pu(p_x, u_x), angle_from_pu(p_y, u_y)
    scale = np.sqrt(u_x * u_y)
    return _interval(
        Metric.P, scale * np.cos(tx + ty), scale * np.cos(tx - ty), "unitarity pair bound"
    )


class CompositeDecayBound(NamedTuple):
    center: float
    halfwidth: float
    halfwidth_S: float
    sigma: float


def composite_decay_bound(p: float, u: float, m: int, d: int, unital: bool = False
                          ) -> CompositeDecayBound:
    """Half-width of the window around ``p**m`` holding ``p(X_1...X_m)``.

    All ``m`` channels share ``p`` and ``u``. The prefactor is ``sqrt(d/2)``
    in general and 1 for unital channels. ``halfwidth_S`` is the tighter
    geometric-sum form.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    _check_pu(p, u)
    sigma = 1.0 if unital else float(np.sqrt(d / 2))
    sin2 = np.sin(angle_from_pu(p, u)) ** 2
    return CompositeDecayBound(
        center=float(p ** m),
        halfwidth=float(sigma * comb(m, 2) * u * sin2),
        halfwidth_S=float(sigma * geometric_sum_S(abs(p), m) * u * sin2),
        sigma=sigma,
    )


def intermediate_regime_upper(r: float, theta: float, d: int, m: int) -> float:
    """Leading-order infidelity ceiling for ``m`` channels with equal ``r`` and angle.

    Valid for unital channels or single-qubit channels; checking that is up
    to the caller.
    """
    coherent = (d - 1) * theta ** 2 / (2 * d)
    return m * (r - coherent) + m * m * coherent


def interleaved_chi00_bounds(chi_composite: float, chi_reference: float) -> BoundInterval:
    """Range of the interleaved gate's chi00 given the composite and reference.

    Works in angle space: with ``a`` and ``b`` the composite and reference
    angles, the individual angle lies in ``[|a - b|, a + b]``.
    """
    _check_unit("chi_composite", chi_composite)
    _check_unit("chi_reference", chi_reference)
    a, b = _angle(chi_composite), _angle(chi_reference)
    upper = np.cos(abs(a - b)) ** 2
    if a + b > np.pi / 2:
        return _interval(Metric.CHI00, 0.0, upper, "interleaved chi00 bound", (ANGLE_VIOLATED,))
    return _interval(Metric.CHI00, np.cos(a + b) ** 2, upper, "interleaved chi00 bound", (ANGLE_OK,))


def interleaved_uncertainty_naive(r_ref: float) -> float:
    """Approximate width ``4 sqrt(2) r`` of the interleaved infidelity interval.

    Applies when the composite infidelity is about twice the reference one.
    """
    if r_ref < 0:
        raise ValueError("r_ref must be nonnegative")
    return 4 * np.sqrt(2) * r_ref


def naive_group_bound(r_avg: float, group_size: int) -> float:
    """``|G| r``: no gate can have more than the whole gate-set budget."""
    if r_avg < 0 or group_size < 1:
        raise ValueError("need r_avg >= 0 and group_size >= 1")
    return group_size * r_avg


def interleaved_decay_bounds(p_composite: float, u_reference: float, theta_reference: float
                             ) -> BoundInterval:
    """Decay-rate interval for the interleaved gate using the reference unitarity.

    ``gamma = p_composite / sqrt(u_reference)`` (clamped to [-1, 1]) and the
    interval is ``gamma cos(t) +/- sin(t) sqrt(1 - gamma^2)``.
    """
    if not u_reference > 0:
        raise ValueError(f"u_reference must be positive, got {u_reference}")
    gamma = float(np.clip(p_composite / np.sqrt(u_reference), -1.0, 1.0))
    mid = gamma * np.cos(theta_reference)
    half = abs(np.sin(theta_reference)) * np.sqrt(1 - gamma * gamma)
    return _interval(Metric.P, mid - half, mid + half, "unitarity interleaved bound")


def interval_to_metric(iv: BoundInterval, target: Metric, d: int) -> BoundInterval:
    """Re-express an interval on F, r, p or chi00 in another of those metrics."""
    src, dst = MetricKind(iv.kind, d), MetricKind(target, d)
    a, b = convert(iv.lower, src, dst), convert(iv.upper, src, dst)
    return _interval(target, min(a, b), max(a, b), iv.source, iv.assumptions, d)
