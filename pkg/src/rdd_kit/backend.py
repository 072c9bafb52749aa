"""Kernel backend selection.

The compiled Cython kernel is preferred when importable; the numpy
fallback is always available. RDD_KIT_BACKEND forces the choice ("c" or
"python"), RDD_KIT_THREADS caps bootstrap worker count (0 = auto, unset
= serial). Selection happens once at import, so a given install runs the
same backend deterministically.
"""

from __future__ import annotations

import os

from . import _kernels_py

__all__ = ["kernels", "backend_name", "worker_count"]


def _select():
    forced = os.environ.get("RDD_KIT_BACKEND", "auto").strip().lower()
    if forced in ("python", "py"):
        return _kernels_py
    try:
        from . import _kernels_c

        return _kernels_c
    except ImportError:
        if forced in ("c", "cython"):
            raise ImportError(
                "RDD_KIT_BACKEND=c but the compiled kernel is not installed"
            )
        return _kernels_py


kernels = _select()


def backend_name() -> str:
    return kernels.BACKEND


def worker_count() -> int:
    raw = os.environ.get("RDD_KIT_THREADS", "").strip()
    if not raw:
        return 1
    value = int(raw)
    if value < 0:
        raise ValueError("RDD_KIT_THREADS must be >= 0")
    if value == 0:
        return os.cpu_count() or 1
    return value
