"""Noisy-channel metrics, composite-error bounds and randomized benchmarking."""
from .bounds import BoundInterval
from .channels import Channel, ChannelError, from_chi, from_choi, from_kraus, make_basis, validate_cptp
from .metrics import ChannelMetrics, Metric, MetricKind, convert
from .rb import ExponentialDecay, fit_decay

__all__ = [
    "BoundInterval",
    "Channel",
    "ChannelError",
    "ChannelMetrics",
    "ExponentialDecay",
    "Metric",
    "MetricKind",
    "convert",
    "fit_decay",
    "from_chi",
    "from_choi",
    "from_kraus",
    "make_basis",
    "validate_cptp",
]
__version__ = "0.1.0"
