"""Kernel backend selection: compiled extension if importable, else numpy."""
import os

BACKEND = "python"
if not os.environ.get("SCHIFFERLAB_PURE_PYTHON"):
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:
        from . import _pykernels as kernels
else:
    from . import _pykernels as kernels

__all__ = ["kernels", "BACKEND"]
