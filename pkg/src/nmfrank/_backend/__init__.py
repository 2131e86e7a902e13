"""Kernel backend selection.

The compiled Cython kernels are used when the extension built; otherwise
the pure-numpy fallback is loaded.  Set ``NMFRANK_BACKEND=python`` (or
``cython``) to force a choice; forcing ``cython`` raises if the extension
is missing.
"""

import os

_requested = os.environ.get("NMFRANK_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _py_kernels as kernels
elif _requested == "cython":
    from . import _cy_kernels as kernels  # type: ignore[no-redef]
else:
    try:
        from . import _cy_kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _py_kernels as kernels

BACKEND_NAME = kernels.BACKEND_NAME

scd_update_h = kernels.scd_update_h
scd_update_w = kernels.scd_update_w

if BACKEND_NAME == "cython":
    import numpy as _np

    # typed memoryviews want uint8, not numpy bool
    def masked_update_h(A, obs, W, H, eps):
        return kernels.masked_update_h(A, _np.ascontiguousarray(obs).view(_np.uint8), W, H, eps)

    def masked_update_w(A, obs, W, H, eps):
        return kernels.masked_update_w(A, _np.ascontiguousarray(obs).view(_np.uint8), W, H, eps)
else:
    masked_update_h = kernels.masked_update_h
    masked_update_w = kernels.masked_update_w
