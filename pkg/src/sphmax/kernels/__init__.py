"""Backend selection for the interpolation kernels.

The compiled core is used when available; the pure-numpy fallback is
selected otherwise, or when SPHMAX_KERNEL=fallback is set.  Both backends
implement identical arithmetic and agree exactly.
"""

from __future__ import annotations

import importlib
import os

from . import _fallback
from ._fallback import interp_at_points

_choice = os.environ.get("SPHMAX_KERNEL", "auto")

_impl = None
if _choice in ("auto", "compiled"):
    try:
        _impl = importlib.import_module("._core", __name__)
    except ImportError:
        if _choice == "compiled":
            raise
elif _choice != "fallback":
    raise ValueError(f"SPHMAX_KERNEL must be auto, compiled, or fallback, not {_choice!r}")

if _impl is not None:
    shifted_sum = _impl.shifted_sum
    shifted_product_sum = _impl.shifted_product_sum
    BACKEND = "compiled"
else:
    shifted_sum = _fallback.shifted_sum
    shifted_product_sum = _fallback.shifted_product_sum
    BACKEND = "fallback"


def backend_name() -> str:
    """Name of the active kernel backend ("compiled" or "fallback")."""
    return BACKEND


__all__ = [
    "shifted_sum",
    "shifted_product_sum",
    "interp_at_points",
    "backend_name",
    "BACKEND",
]
