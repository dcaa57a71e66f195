"""Kernel selection: compiled extension when importable, else fallback."""
import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("HULLVOL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

monotone_chain = _impl.monotone_chain
shoelace = _impl.shoelace
outside_mask = _impl.outside_mask

__all__ = ["BACKEND", "monotone_chain", "shoelace", "outside_mask"]
