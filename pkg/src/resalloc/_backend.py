"""Kernel backend selection.

The compiled Cython extension is preferred when importable; otherwise the
pure numpy/Python fallback is used. Both expose the same four kernels with
bit-identical behaviour. Set RESALLOC_FORCE_BACKEND=pure or =compiled to
override (=compiled raises if the extension is missing).
"""

from __future__ import annotations

import os

_FORCE = os.environ.get("RESALLOC_FORCE_BACKEND", "").strip().lower()
if _FORCE not in ("", "pure", "compiled"):
    raise ImportError(
        f"RESALLOC_FORCE_BACKEND must be 'pure' or 'compiled', got {_FORCE!r}")

if _FORCE == "pure":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        if _FORCE == "compiled":
            raise
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND_NAME

best_gain_candidate = kernels.best_gain_candidate
best_product_candidate = kernels.best_product_candidate
best_swap_donor = kernels.best_swap_donor
oracle_search = kernels.oracle_search
