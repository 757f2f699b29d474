"""Backend selection for the hot feature kernel.

The compiled Cython extension is preferred when it imported cleanly; the
NumPy implementation is the fallback. ``DEPCON_BACKEND`` overrides the
choice (``compiled`` | ``numpy`` | ``auto``).
"""

from __future__ import annotations

import os

from . import _accel_np

try:
    from . import _accel
except ImportError:  # extension not built
    _accel = None


def available_backends() -> tuple[str, ...]:
    return ("compiled", "numpy") if _accel is not None else ("numpy",)


def get_backend(name: str | None = None):
    """Return (backend_name, module) honoring an explicit or environment override."""
    choice = name or os.environ.get("DEPCON_BACKEND", "auto")
    if choice == "numpy":
        return "numpy", _accel_np
    if choice == "compiled":
        if _accel is None:
            raise ImportError("compiled backend requested but depcon._accel is not built")
        return "compiled", _accel
    if choice != "auto":
        raise ValueError(f"unknown backend {choice!r}")
    if _accel is not None:
        return "compiled", _accel
    return "numpy", _accel_np


BACKEND_NAME, _impl = get_backend()


def phi_feature_block(x, row_mean, grand_mean, start, stop, standardize, out):
    _impl.phi_feature_block(x, row_mean, grand_mean, start, stop, standardize, out)
