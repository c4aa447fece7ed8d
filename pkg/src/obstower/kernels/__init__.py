"""Backend selection for the echelon kernel.

The compiled extension (``_core``) is used when present; set
``OBSTOWER_FORCE_PURE=1`` to force the numpy fallback.  Both expose the
same ``Echelon`` class and ``canon_sparse`` helper.
"""

import os

from . import _pure

if os.environ.get("OBSTOWER_FORCE_PURE", "") not in ("", "0"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

Echelon = _impl.Echelon
canon_sparse = _impl.canon_sparse


def available_backends():
    """Name -> module for every importable backend (parity tests)."""
    out = {"pure": _pure}
    try:
        from . import _core
        out["compiled"] = _core
    except ImportError:
        pass
    return out
