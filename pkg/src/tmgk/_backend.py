"""Select the kernel backend at import time.

The compiled ``tmgk._core`` extension is preferred. Set ``TMGK_PURE_PYTHON=1``
to force the pure-Python fallback (useful for debugging and benchmarking).
"""
from __future__ import annotations

import os

from tmgk import _pycore

_FORCE_PURE = os.environ.get("TMGK_PURE_PYTHON", "").strip() not in ("", "0")

if _FORCE_PURE:
    core = _pycore
    BACKEND = "python"
else:
    try:
        from tmgk import _core as core  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        core = _pycore
        BACKEND = "python"

BACKENDS = {"python": _pycore}
if BACKEND == "cython":
    BACKENDS["cython"] = core


def get_backend(name: str | None = None):
    """Return the kernel module named ``name`` (default: the active one)."""
    if name is None:
        return core
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {sorted(BACKENDS)}") from None
