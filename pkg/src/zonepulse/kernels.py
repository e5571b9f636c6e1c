"""Kernel backend selection.

The compiled extension is used when it importable; set ``ZONEPULSE_PURE=1``
to force the NumPy fallback (useful for benchmarking and debugging).
"""
from __future__ import annotations

import os

from ._kernels_py import BOUNDARY_EPS, ZonePack  # noqa: F401  (shared container)
from . import _kernels_py

if os.environ.get("ZONEPULSE_PURE"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

contains = _impl.contains
contains_many = _impl.contains_many
assign = _impl.assign
