"""Kernel backend selection.

The compiled extension is used when it imports; setting ``STOREPLAN_PURE_PYTHON=1``
forces the pure-Python fallback.  Both expose the same functions.
"""
import os

from . import _pykernels

if os.environ.get("STOREPLAN_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = _impl.BACKEND
match_blocks = _impl.match_blocks
search_optimal = _impl.search_optimal

NO_CONSTRAINT = _pykernels.NO_CONSTRAINT
STORAGE = _pykernels.STORAGE
SUM_REC = _pykernels.SUM_REC
MAX_REC = _pykernels.MAX_REC


def available_backends():
    """Modules for every backend importable in this environment."""
    mods = [_pykernels]
    try:
        from . import _ckernels
        mods.append(_ckernels)
    except ImportError:
        pass
    return mods
