"""Hot loops over encoded truncations.

The compiled extension is used when it was built; otherwise the numpy
implementation is loaded.  Set ``VALMIN_PURE=1`` to force the fallback.
"""
import os

if os.environ.get("VALMIN_PURE", "") not in ("", "0"):
    from . import _pykernels as impl
    BACKEND = "numpy"
else:
    try:
        from . import _ckernels as impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _pykernels as impl
        BACKEND = "numpy"

levels = impl.levels
affine_levels = impl.affine_levels
pair_scan = impl.pair_scan
implication_scan = impl.implication_scan

__all__ = ["BACKEND", "levels", "affine_levels", "pair_scan", "implication_scan"]
