"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the pure-Python
twin. Set ``RANKBENCH_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

__all__ = ["BACKEND", "fold_weighted", "interval_mean", "load_backend", "loss_curve"]


def load_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name`` ("cython" or "python"); ``None`` picks the best available."""
    if name == "python":
        return _pykernels
    if name not in (None, "cython"):
        raise ValueError(f"unknown backend {name!r}")
    try:
        from . import _ckernels
    except ImportError:
        if name == "cython":
            raise
        return _pykernels
    return _ckernels


_module = load_backend("python" if os.environ.get("RANKBENCH_PURE_PYTHON") else None)
BACKEND = "python" if _module is _pykernels else "cython"

fold_weighted = _module.fold_weighted
loss_curve = _module.loss_curve
interval_mean = _module.interval_mean
