"""Kernel backend selection: compiled extension if built, numpy otherwise.

Set HJB_BACKEND=python (or =cython) to force a choice; forcing cython when
the extension is missing raises at import of the consumer module.
"""

from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("HJB_BACKEND", "").strip().lower()

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

if _forced == "python":
    kernels = _kernels_py
elif _forced == "cython":
    if _compiled is None:
        raise ImportError("HJB_BACKEND=cython but the compiled kernels are not built")
    kernels = _compiled
else:
    kernels = _compiled if _compiled is not None else _kernels_py

BACKEND = kernels.BACKEND


def available_backends() -> dict:
    """Name -> kernel module for every backend importable here."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
