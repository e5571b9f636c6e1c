"""zonepulse: multimodal urban occupancy anomaly detection and event evaluation."""

from .kernels import BACKEND as KERNEL_BACKEND  # noqa: F401

__version__ = "0.1.0"
