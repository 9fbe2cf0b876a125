"""Backend selection for the leapfrog half-updates.

The compiled extension is used when it imports; otherwise, or when
``PROCRUSTES_POVM_PURE_PYTHON`` is set to a non-empty value, the NumPy
implementation is used. Both backends agree to round-off.
"""
from __future__ import annotations

import os

from . import _leapfrog_py

BACKENDS = {"python": _leapfrog_py}

try:
    from . import _leapfrog as _compiled  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None
else:
    BACKENDS["compiled"] = _compiled

if _compiled is not None and not os.environ.get("PROCRUSTES_POVM_PURE_PYTHON"):
    BACKEND = "compiled"
else:
    BACKEND = "python"


def get_backend(name: str | None = None):
    """Module exposing ``update_u`` / ``update_v``; ``None`` means the active one."""
    name = name or BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
